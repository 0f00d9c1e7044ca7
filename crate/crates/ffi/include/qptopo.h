#ifndef QPTOPO_H
#define QPTOPO_H

#pragma once

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QpIntervalKind {
  QP_INTERVAL_KIND_INTERVAL = 0,
  QP_INTERVAL_KIND_POINT = 1,
  QP_INTERVAL_KIND_EMPTY = 2,
} QpIntervalKind;

typedef enum QpLabelKind {
  QP_LABEL_KIND_OPEN = 0,
  QP_LABEL_KIND_CLOSED = 1,
  QP_LABEL_KIND_UNDETERMINED = 2,
} QpLabelKind;

typedef enum QpStatus {
  QP_STATUS_OK = 0,
  QP_STATUS_NULL_POINTER = 1,
  QP_STATUS_INVALID_ARGUMENT = 2,
  QP_STATUS_PARSE = 3,
  QP_STATUS_UNKNOWN_MODEL = 4,
  QP_STATUS_COMPUTATION = 5,
  QP_STATUS_IO = 6,
  QP_STATUS_PANIC = 7,
} QpStatus;

typedef enum QpVerdictKind {
  QP_VERDICT_KIND_CLOSED = 0,
  QP_VERDICT_KIND_OPEN = 1,
  QP_VERDICT_KIND_UNDETERMINED = 2,
} QpVerdictKind;

/**
 * Periodic field handle.
 */
typedef struct QpField QpField;

/**
 * Triangulated level surface handle.
 */
typedef struct QpMesh QpMesh;

typedef struct QpLabel {
  enum QpLabelKind kind;
  /**
   * Integer class of the open curves; zero unless `kind` is `Open`.
   */
  int64_t homology_class[3];
} QpLabel;

typedef struct QpInterval {
  enum QpIntervalKind kind;
  double low;
  double upp;
} QpInterval;

typedef struct QpOrbitSummary {
  enum QpVerdictKind verdict;
  /**
   * Unit drift direction in plane coordinates, for open orbits.
   */
  double direction[2];
  /**
   * Strip width for open orbits, loop length for closed ones.
   */
  double size;
  double arc_length;
  double residual;
  size_t points;
} QpOrbitSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *qp_version(void);

/**
 * Copies the calling thread's last error message into `buf` (truncated, always
 * NUL-terminated when `len > 0`). Returns the full message length in bytes,
 * or 0 when there is no error.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t qp_last_error_message(char *buf, size_t len);

/**
 * Looks up a built-in model by name.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum QpStatus qp_field_builtin(const char *name, struct QpField **out);

/**
 * Parses a model from its text form.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum QpStatus qp_field_parse(const char *text, struct QpField **out);

/**
 * # Safety
 * `field` must be null or a handle from this library not yet freed.
 */
void qp_field_free(struct QpField *field);

/**
 * # Safety
 * `field` must be a live handle; `out` must be writable.
 */
enum QpStatus qp_field_dim(const struct QpField *field, size_t *out);

/**
 * Evaluates the field at a point with `n` coordinates.
 *
 * # Safety
 * `point` must hold `n` doubles; `out` must be writable.
 */
enum QpStatus qp_field_evaluate(const struct QpField *field,
                                const double *point,
                                size_t n,
                                double *out);

/**
 * Extracts the level surface `F = level` on an `resolution`³ grid.
 *
 * # Safety
 * `field` must be a live handle; `out` must be writable.
 */
enum QpStatus qp_mesh_extract(const struct QpField *field,
                              double level,
                              size_t resolution,
                              struct QpMesh **out);

/**
 * # Safety
 * `mesh` must be null or a handle from this library not yet freed.
 */
void qp_mesh_free(struct QpMesh *mesh);

/**
 * Vertex and triangle counts.
 *
 * # Safety
 * `mesh` must be a live handle; both outputs must be writable.
 */
enum QpStatus qp_mesh_size(const struct QpMesh *mesh, size_t *vertices, size_t *triangles);

/**
 * Writes up to `cap` component genera into `genera` and the total number of
 * components into `count`.
 *
 * # Safety
 * `genera` must be null (with `cap == 0`) or hold `cap` writable slots.
 */
enum QpStatus qp_mesh_genera(const struct QpMesh *mesh, int64_t *genera, size_t cap, size_t *count);

/**
 * Topological label of the integer direction `b` at `level`.
 *
 * # Safety
 * `b` must hold 3 integers; `out` must be writable.
 */
enum QpStatus qp_label(const struct QpField *field,
                       double level,
                       const int64_t *b,
                       size_t resolution,
                       struct QpLabel *out);

/**
 * Levels carrying open sections for the integer direction `b`.
 *
 * # Safety
 * `b` must hold 3 integers; `out` must be writable.
 */
enum QpStatus qp_energy_interval(const struct QpField *field,
                                 const int64_t *b,
                                 size_t resolution,
                                 double tolerance,
                                 struct QpInterval *out);

/**
 * Traces the level curve of the field restricted to the plane with the given
 * normal and offset (fields on T³ only), starting near `start`.
 *
 * # Safety
 * `normal` and `offset` must hold 3 doubles, `start` 2; `out` must be writable.
 */
enum QpStatus qp_trace(const struct QpField *field,
                       const double *normal,
                       const double *offset,
                       double level,
                       const double *start,
                       double max_arc,
                       struct QpOrbitSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QPTOPO_H */
