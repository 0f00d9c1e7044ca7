//! C interface to `qptopo`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and released
//! with the matching `*_free`. Every entry point returns a [`QpStatus`]; on
//! failure a message is kept per thread and can be read with
//! [`qp_last_error_message`]. Panics are caught and reported as
//! [`QpStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qptopo::error::Error;
use qptopo::fields::{builtin_model, parse_model, PeriodicField};
use qptopo::foliation::{compute_label, energy_interval, Direction, IntervalKind, Label};
use qptopo::mesh::{extract_isosurface, split_components, TorusMesh};
use qptopo::planar::{self, PlaneEmbedding, TraceOptions, Verdict};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    UnknownModel = 4,
    Computation = 5,
    Io = 6,
    Panic = 7,
}

/// Periodic field handle.
pub struct QpField(PeriodicField);

/// Triangulated level surface handle.
pub struct QpMesh(TorusMesh);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QpLabelKind {
    Open = 0,
    Closed = 1,
    Undetermined = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct QpLabel {
    pub kind: QpLabelKind,
    /// Integer class of the open curves; zero unless `kind` is `Open`.
    pub homology_class: [i64; 3],
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QpIntervalKind {
    Interval = 0,
    Point = 1,
    Empty = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct QpInterval {
    pub kind: QpIntervalKind,
    pub low: f64,
    pub upp: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QpVerdictKind {
    Closed = 0,
    Open = 1,
    Undetermined = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct QpOrbitSummary {
    pub verdict: QpVerdictKind,
    /// Unit drift direction in plane coordinates, for open orbits.
    pub direction: [f64; 2],
    /// Strip width for open orbits, loop length for closed ones.
    pub size: f64,
    pub arc_length: f64,
    pub residual: f64,
    pub points: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QpStatus {
    match e {
        Error::Argument(_) | Error::SingularBasis(_) | Error::DegenerateStart { .. } => QpStatus::InvalidArgument,
        Error::Parse { .. } => QpStatus::Parse,
        Error::UnknownModel { .. } => QpStatus::UnknownModel,
        Error::DegenerateFit(_) | Error::Computation(_) => QpStatus::Computation,
        Error::Io(_) => QpStatus::Io,
    }
}

struct Fail(QpStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(QpStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status and the last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QpStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QpStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("panic: {msg}"));
            QpStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(QpStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated, always
/// NUL-terminated when `len > 0`). Returns the full message length in bytes,
/// or 0 when there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn qp_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Looks up a built-in model by name.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qp_field_builtin(name: *const c_char, out: *mut *mut QpField) -> QpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let f = builtin_model(str_arg(name, "name")?)?;
        *out = Box::into_raw(Box::new(QpField(f)));
        Ok(())
    })
}

/// Parses a model from its text form.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qp_field_parse(text: *const c_char, out: *mut *mut QpField) -> QpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let f = parse_model(str_arg(text, "text")?)?;
        *out = Box::into_raw(Box::new(QpField(f)));
        Ok(())
    })
}

/// # Safety
/// `field` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qp_field_free(field: *mut QpField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// # Safety
/// `field` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qp_field_dim(field: *const QpField, out: *mut usize) -> QpStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(field, "field")?.0.dim();
        Ok(())
    })
}

/// Evaluates the field at a point with `n` coordinates.
///
/// # Safety
/// `point` must hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qp_field_evaluate(
    field: *const QpField,
    point: *const f64,
    n: usize,
    out: *mut f64,
) -> QpStatus {
    guard(|| {
        let f = ref_arg(field, "field")?;
        if point.is_null() {
            return Err(null("point"));
        }
        let p = std::slice::from_raw_parts(point, n);
        *out_arg(out, "out")? = f.0.evaluate(p)?;
        Ok(())
    })
}

/// Extracts the level surface `F = level` on an `resolution`³ grid.
///
/// # Safety
/// `field` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qp_mesh_extract(
    field: *const QpField,
    level: f64,
    resolution: usize,
    out: *mut *mut QpMesh,
) -> QpStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let m = extract_isosurface(&ref_arg(field, "field")?.0, level, resolution)?;
        *out = Box::into_raw(Box::new(QpMesh(m)));
        Ok(())
    })
}

/// # Safety
/// `mesh` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qp_mesh_free(mesh: *mut QpMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Vertex and triangle counts.
///
/// # Safety
/// `mesh` must be a live handle; both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn qp_mesh_size(mesh: *const QpMesh, vertices: *mut usize, triangles: *mut usize) -> QpStatus {
    guard(|| {
        let m = &ref_arg(mesh, "mesh")?.0;
        *out_arg(vertices, "vertices")? = m.vertices.len();
        *out_arg(triangles, "triangles")? = m.triangles.len();
        Ok(())
    })
}

/// Writes up to `cap` component genera into `genera` and the total number of
/// components into `count`.
///
/// # Safety
/// `genera` must be null (with `cap == 0`) or hold `cap` writable slots.
#[no_mangle]
pub unsafe extern "C" fn qp_mesh_genera(
    mesh: *const QpMesh,
    genera: *mut i64,
    cap: usize,
    count: *mut usize,
) -> QpStatus {
    guard(|| {
        let comps = split_components(&ref_arg(mesh, "mesh")?.0);
        *out_arg(count, "count")? = comps.len();
        if cap > 0 {
            if genera.is_null() {
                return Err(null("genera"));
            }
            let slots = std::slice::from_raw_parts_mut(genera, cap);
            for (s, c) in slots.iter_mut().zip(&comps) {
                *s = c.genus;
            }
        }
        Ok(())
    })
}

/// Topological label of the integer direction `b` at `level`.
///
/// # Safety
/// `b` must hold 3 integers; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qp_label(
    field: *const QpField,
    level: f64,
    b: *const i64,
    resolution: usize,
    out: *mut QpLabel,
) -> QpStatus {
    guard(|| {
        let f = ref_arg(field, "field")?;
        if b.is_null() {
            return Err(null("b"));
        }
        let b = std::slice::from_raw_parts(b, 3);
        let dir = Direction::rational([b[0], b[1], b[2]])?;
        let label = compute_label(&f.0, level, &dir, resolution)?;
        let out = out_arg(out, "out")?;
        *out = match label {
            Label::OpenStable(c) => QpLabel { kind: QpLabelKind::Open, homology_class: c },
            Label::AllClosed => QpLabel { kind: QpLabelKind::Closed, homology_class: [0; 3] },
            Label::Undetermined(reason) => {
                set_error(&reason);
                QpLabel { kind: QpLabelKind::Undetermined, homology_class: [0; 3] }
            }
        };
        Ok(())
    })
}

/// Levels carrying open sections for the integer direction `b`.
///
/// # Safety
/// `b` must hold 3 integers; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qp_energy_interval(
    field: *const QpField,
    b: *const i64,
    resolution: usize,
    tolerance: f64,
    out: *mut QpInterval,
) -> QpStatus {
    guard(|| {
        let f = ref_arg(field, "field")?;
        if b.is_null() {
            return Err(null("b"));
        }
        let b = std::slice::from_raw_parts(b, 3);
        let dir = Direction::rational([b[0], b[1], b[2]])?;
        let iv = energy_interval(&f.0, &dir, resolution, tolerance)?;
        *out_arg(out, "out")? = QpInterval {
            kind: match iv.kind {
                IntervalKind::Interval => QpIntervalKind::Interval,
                IntervalKind::Point => QpIntervalKind::Point,
                IntervalKind::Empty => QpIntervalKind::Empty,
            },
            low: iv.low,
            upp: iv.upp,
        };
        Ok(())
    })
}

/// Traces the level curve of the field restricted to the plane with the given
/// normal and offset (fields on T³ only), starting near `start`.
///
/// # Safety
/// `normal` and `offset` must hold 3 doubles, `start` 2; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qp_trace(
    field: *const QpField,
    normal: *const f64,
    offset: *const f64,
    level: f64,
    start: *const f64,
    max_arc: f64,
    out: *mut QpOrbitSummary,
) -> QpStatus {
    guard(|| {
        let f = ref_arg(field, "field")?;
        if normal.is_null() || offset.is_null() || start.is_null() {
            return Err(null("normal, offset or start"));
        }
        let n = std::slice::from_raw_parts(normal, 3);
        let o = std::slice::from_raw_parts(offset, 3);
        let s = std::slice::from_raw_parts(start, 2);
        let psi = PlaneEmbedding::from_normal([n[0], n[1], n[2]], [o[0], o[1], o[2]])?;
        let q = planar::restrict(&f.0, &psi)?;
        let opts = TraceOptions { max_arc, ..Default::default() };
        let orbit = planar::trace_orbit(&q, level, [s[0], s[1]], &opts)?;
        let (verdict, direction, size) = match &orbit.verdict {
            Verdict::Closed { length } => (QpVerdictKind::Closed, [0.0; 2], *length),
            Verdict::Open { direction, strip_width } => (QpVerdictKind::Open, *direction, *strip_width),
            Verdict::Undetermined { reason } => {
                set_error(reason);
                (QpVerdictKind::Undetermined, [0.0; 2], 0.0)
            }
        };
        *out_arg(out, "out")? = QpOrbitSummary {
            verdict,
            direction,
            size,
            arc_length: orbit.arc_length(),
            residual: orbit.residual,
            points: orbit.points.len(),
        };
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> String {
        let mut buf = [0 as c_char; 256];
        unsafe { qp_last_error_message(buf.as_mut_ptr(), buf.len()) };
        unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
    }

    #[test]
    fn unknown_model_sets_error() {
        let mut f = ptr::null_mut();
        let st = unsafe { qp_field_builtin(c"nosuch".as_ptr(), &mut f) };
        assert_eq!(st, QpStatus::UnknownModel);
        assert!(f.is_null());
        assert!(last_error().contains("nosuch"));
    }

    #[test]
    fn null_arguments_are_reported() {
        assert_eq!(unsafe { qp_field_builtin(ptr::null(), ptr::null_mut()) }, QpStatus::NullPointer);
        let mut d = 0;
        assert_eq!(unsafe { qp_field_dim(ptr::null(), &mut d) }, QpStatus::NullPointer);
    }

    #[test]
    fn panics_are_caught() {
        assert_eq!(guard(|| panic!("boom")), QpStatus::Panic);
        assert!(last_error().contains("boom"));
        assert_eq!(guard(|| Ok(())), QpStatus::Ok);
        assert_eq!(unsafe { qp_last_error_message(ptr::null_mut(), 0) }, 0);
    }

    #[test]
    fn truncated_error_stays_terminated() {
        set_error("abcdefgh");
        let mut buf = [1 as c_char; 4];
        let n = unsafe { qp_last_error_message(buf.as_mut_ptr(), 4) };
        assert_eq!(n, 8);
        assert_eq!(unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap(), "abc");
    }
}
