//! Level surfaces of 3-periodic fields as closed triangle meshes on the unit 3-torus.
//!
//! Vertices live in the fundamental cell [0,1)³. Wrap-around is never stored as
//! duplicated geometry; instead every directed triangle edge carries the lattice
//! shift crossed along it, so the true displacement of edge `u → w` is
//! `(pos[w] + shift) - pos[u]`.

use std::collections::HashMap;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::PeriodicField;
use crate::homology;
use crate::topology::HalfEdges;

pub type Shift = [i32; 3];

#[derive(Clone, Debug, PartialEq)]
pub struct TorusMesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
    /// `shifts[t][k]` is the shift of directed edge `triangles[t][k] → triangles[t][(k+1)%3]`.
    pub shifts: Vec<[Shift; 3]>,
    pub resolution: usize,
    pub requested_level: f64,
    /// Level actually meshed; differs from the request only by the exact-hit perturbation.
    pub level: f64,
}

/// Where a surface vertex is put on its grid edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum VertexPlacement {
    /// Linear interpolation of the two grid samples.
    #[default]
    Linear,
    /// Root of the field along the grid edge (bracketed secant), so vertices lie on the
    /// level set to round-off.
    Exact,
}

#[derive(Clone, Copy, Debug)]
pub struct ExtractOptions {
    pub resolution: usize,
    pub placement: VertexPlacement,
}

impl ExtractOptions {
    pub fn new(resolution: usize) -> Self {
        ExtractOptions { resolution, placement: VertexPlacement::Linear }
    }

    pub fn exact(resolution: usize) -> Self {
        ExtractOptions { resolution, placement: VertexPlacement::Exact }
    }
}

/// Default grid size for genus decisions.
pub const DEFAULT_GENUS_RESOLUTION: usize = 64;
/// Default grid size for foliation work.
pub const DEFAULT_FOLIATION_RESOLUTION: usize = 96;

impl TorusMesh {
    pub fn empty(resolution: usize, level: f64) -> Self {
        TorusMesh {
            vertices: Vec::new(),
            triangles: Vec::new(),
            shifts: Vec::new(),
            resolution,
            requested_level: level,
            level,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn level_shift(&self) -> f64 {
        self.level - self.requested_level
    }

    /// Lattice offsets of the three corners placing triangle `t` as one connected
    /// piece of ℝ³ (first corner unshifted).
    pub fn corner_lifts(&self, t: usize) -> [Shift; 3] {
        let s = &self.shifts[t];
        let l1 = s[0];
        let l2 = add(l1, s[1]);
        [[0, 0, 0], l1, l2]
    }

    /// Corner positions of triangle `t` in one connected lift.
    pub fn lifted_triangle(&self, t: usize) -> [[f64; 3]; 3] {
        let lifts = self.corner_lifts(t);
        let tri = self.triangles[t];
        let mut out = [[0.0; 3]; 3];
        for k in 0..3 {
            let p = self.vertices[tri[k] as usize];
            for a in 0..3 {
                out[k][a] = p[a] + lifts[k][a] as f64;
            }
        }
        out
    }

    /// Map from directed edge to its lattice shift. Later duplicates (only present on
    /// invalid meshes) overwrite earlier ones.
    pub fn edge_shifts(&self) -> HashMap<(u32, u32), Shift> {
        let mut map = HashMap::with_capacity(self.triangles.len() * 3);
        for (tri, sh) in self.triangles.iter().zip(&self.shifts) {
            for k in 0..3 {
                map.insert((tri[k], tri[(k + 1) % 3]), sh[k]);
            }
        }
        map
    }

    /// Number of distinct undirected edges.
    pub fn edge_count(&self) -> usize {
        let mut edges: Vec<(u32, u32)> = self
            .triangles
            .iter()
            .flat_map(|t| (0..3).map(move |k| ordered(t[k], t[(k + 1) % 3])))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges.len()
    }

    /// V − E + T of the whole mesh.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.triangles.len() as i64
    }

    /// Largest |F(vertex) − level| over all vertices.
    pub fn max_residual(&self, field: &PeriodicField) -> f64 {
        self.vertices
            .iter()
            .map(|p| (field.value(p) - self.level).abs())
            .fold(0.0, f64::max)
    }
}

fn add(a: Shift, b: Shift) -> Shift {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub(a: Shift, b: Shift) -> Shift {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn ordered(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

// Cube corners are encoded as bit masks: bit 0 = x, bit 1 = y, bit 2 = z.
fn corner_offset(c: u8) -> [i64; 3] {
    [(c & 1) as i64, ((c >> 1) & 1) as i64, ((c >> 2) & 1) as i64]
}

/// Edge directions of the Kuhn triangulation: every edge joins a corner to a
/// componentwise-larger one.
const EDGE_DIRS: [u8; 7] = [1, 2, 3, 4, 5, 6, 7];

fn dir_slot(d: u8) -> usize {
    (d - 1) as usize
}

/// The six Kuhn tetrahedra of the unit cube, one per axis permutation,
/// as corner masks 0 → e_a → e_a + e_b → (1,1,1).
fn kuhn_tets() -> [[u8; 4]; 6] {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = [[0u8; 4]; 6];
    for (i, p) in perms.iter().enumerate() {
        let a = 1u8 << p[0];
        let b = a | (1u8 << p[1]);
        out[i] = [0, a, b, 7];
    }
    out
}

type TriTemplate = [(u8, u8); 3];

/// `table[tet][mask]`: triangles (as pairs of cube corners spanning the cut edge)
/// for the sign pattern `mask` (bit i set = corner i of the tet is above the level).
/// Orientation makes the normal point from the negative toward the positive side.
fn tet_table() -> &'static Vec<Vec<Vec<TriTemplate>>> {
    static TABLE: OnceLock<Vec<Vec<Vec<TriTemplate>>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        kuhn_tets()
            .iter()
            .map(|tet| (0u8..16).map(|mask| tet_triangles(tet, mask)).collect())
            .collect()
    })
}

fn tet_triangles(tet: &[u8; 4], mask: u8) -> Vec<TriTemplate> {
    let pos: Vec<u8> = (0..4).filter(|i| mask & (1 << i) != 0).map(|i| tet[i]).collect();
    let neg: Vec<u8> = (0..4).filter(|i| mask & (1 << i) == 0).map(|i| tet[i]).collect();
    let mid = |a: u8, b: u8| {
        let (pa, pb) = (corner_offset(a), corner_offset(b));
        [
            (pa[0] + pb[0]) as f64 * 0.5,
            (pa[1] + pb[1]) as f64 * 0.5,
            (pa[2] + pb[2]) as f64 * 0.5,
        ]
    };
    let centroid = |cs: &[u8]| {
        let mut c = [0.0; 3];
        for &x in cs {
            let o = corner_offset(x);
            for a in 0..3 {
                c[a] += o[a] as f64 / cs.len() as f64;
            }
        }
        c
    };
    let toward_positive = {
        let (cp, cn) = (centroid(&pos), centroid(&neg));
        [cp[0] - cn[0], cp[1] - cn[1], cp[2] - cn[2]]
    };
    let orient = |tri: TriTemplate| -> TriTemplate {
        let p: Vec<[f64; 3]> = tri.iter().map(|&(a, b)| mid(a, b)).collect();
        let u = [p[1][0] - p[0][0], p[1][1] - p[0][1], p[1][2] - p[0][2]];
        let v = [p[2][0] - p[0][0], p[2][1] - p[0][1], p[2][2] - p[0][2]];
        let n = crate::fields::cross3(u, v);
        let s = crate::fields::dot3(n, toward_positive);
        debug_assert!(s != 0.0);
        if s > 0.0 {
            tri
        } else {
            [tri[0], tri[2], tri[1]]
        }
    };
    match (pos.len(), neg.len()) {
        (0, _) | (_, 0) => Vec::new(),
        (1, 3) => vec![orient([(pos[0], neg[0]), (pos[0], neg[1]), (pos[0], neg[2])])],
        (3, 1) => vec![orient([(neg[0], pos[0]), (neg[0], pos[1]), (neg[0], pos[2])])],
        (2, 2) => {
            let q = [(pos[0], neg[0]), (pos[0], neg[1]), (pos[1], neg[1]), (pos[1], neg[0])];
            let first = orient([q[0], q[1], q[2]]);
            if first[1] == q[1] {
                vec![first, [q[0], q[2], q[3]]]
            } else {
                vec![first, [q[0], q[3], q[2]]]
            }
        }
        _ => unreachable!(),
    }
}

struct Grid {
    n: usize,
    values: Vec<f64>,
}

impl Grid {
    fn sample(field: &PeriodicField, level: f64, n: usize) -> Grid {
        let inv = 1.0 / n as f64;
        let mut values = vec![0.0; n * n * n];
        values.par_chunks_mut(n * n).enumerate().for_each(|(k, slab)| {
            for j in 0..n {
                for i in 0..n {
                    let p = [i as f64 * inv, j as f64 * inv, k as f64 * inv];
                    slab[i + n * j] = field.value(&p) - level;
                }
            }
        });
        Grid { n, values }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n * (j + self.n * k)
    }

    #[inline]
    fn wrapped(&self, p: [i64; 3]) -> ([usize; 3], [i32; 3]) {
        let n = self.n as i64;
        let mut w = [0usize; 3];
        let mut lift = [0i32; 3];
        for a in 0..3 {
            let r = p[a].rem_euclid(n);
            w[a] = r as usize;
            lift[a] = ((p[a] - r) / n) as i32;
        }
        (w, lift)
    }

    #[inline]
    fn value_at(&self, p: [i64; 3]) -> f64 {
        let (w, _) = self.wrapped(p);
        self.values[self.idx(w[0], w[1], w[2])]
    }
}

/// Marching-tetrahedra extraction with linear vertex placement.
pub fn extract_isosurface(field: &PeriodicField, level: f64, resolution: usize) -> Result<TorusMesh> {
    extract_isosurface_with(field, level, &ExtractOptions::new(resolution))
}

/// Extracts `{F = level}` on an N³ periodic grid. Each cube is split into the six
/// Kuhn tetrahedra (a translation-invariant triangulation, so the decomposition is
/// compatible across the periodic faces); the piecewise-linear level set of the
/// tetrahedral interpolant is a closed oriented 2-manifold with no ambiguous cases.
pub fn extract_isosurface_with(
    field: &PeriodicField,
    level: f64,
    opts: &ExtractOptions,
) -> Result<TorusMesh> {
    let n = opts.resolution;
    if n < 8 {
        return Err(Error::argument(format!("resolution must be >= 8, got {n}")));
    }
    if field.dim() != 3 {
        return Err(Error::argument(format!(
            "isosurface extraction needs a 3-dimensional field, got dim {}",
            field.dim()
        )));
    }
    if !level.is_finite() {
        return Err(Error::argument("level must be finite"));
    }

    let eps = 1e-9 * field.amplitude_sum().max(1.0);
    let mut used = level;
    let mut grid = Grid::sample(field, used, n);
    let mut attempts = 0;
    while grid.values.iter().any(|&v| v == 0.0) {
        attempts += 1;
        if attempts > 16 {
            return Err(Error::Computation("could not perturb level off the grid values".into()));
        }
        used += eps;
        grid = Grid::sample(field, used, n);
    }

    let above = |v: f64| v > 0.0;
    let has_pos = grid.values.iter().any(|&v| above(v));
    let has_neg = grid.values.iter().any(|&v| !above(v));
    if !(has_pos && has_neg) {
        let mut m = TorusMesh::empty(n, level);
        m.level = used;
        return Ok(m);
    }

    // Vertex numbering: one slot per (grid point, Kuhn edge direction), numbered in
    // slot order so the result is independent of scheduling.
    let slots = n * n * n * 7;
    let active: Vec<bool> = (0..slots)
        .into_par_iter()
        .map(|s| {
            let g = s / 7;
            let d = EDGE_DIRS[s % 7];
            let (i, j, k) = (g % n, (g / n) % n, g / (n * n));
            let o = corner_offset(d);
            let a = grid.values[g];
            let b = grid.value_at([i as i64 + o[0], j as i64 + o[1], k as i64 + o[2]]);
            above(a) != above(b)
        })
        .collect();
    let mut index = vec![u32::MAX; slots];
    let mut count = 0u32;
    for (s, &on) in active.iter().enumerate() {
        if on {
            index[s] = count;
            count += 1;
        }
    }
    drop(active);

    let inv = 1.0 / n as f64;
    let active_slots: Vec<usize> = (0..slots).filter(|&s| index[s] != u32::MAX).collect();
    let placed: Vec<([f64; 3], Shift)> = active_slots
        .par_iter()
        .map(|&s| {
            let g = s / 7;
            let d = corner_offset(EDGE_DIRS[s % 7]);
            let base = [(g % n) as f64, ((g / n) % n) as f64, (g / (n * n)) as f64];
            let (i, j, k) = (g % n, (g / n) % n, g / (n * n));
            let fa = grid.values[g];
            let fb = grid.value_at([i as i64 + d[0], j as i64 + d[1], k as i64 + d[2]]);
            let t = match opts.placement {
                VertexPlacement::Linear => fa / (fa - fb),
                VertexPlacement::Exact => edge_root(field, used, base, d, inv, fa, fb),
            };
            let mut p = [0.0; 3];
            let mut off = [0i32; 3];
            for a in 0..3 {
                let x = (base[a] + t * d[a] as f64) * inv;
                let f = x.floor();
                p[a] = x - f;
                off[a] = f as i32;
                if p[a] >= 1.0 {
                    p[a] -= 1.0;
                    off[a] += 1;
                }
            }
            (p, off)
        })
        .collect();
    let vertices: Vec<[f64; 3]> = placed.iter().map(|x| x.0).collect();
    let vertex_offset: Vec<Shift> = placed.iter().map(|x| x.1).collect();

    let table = tet_table();
    let tets = kuhn_tets();
    let per_slab: Vec<(Vec<[u32; 3]>, Vec<[Shift; 3]>)> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut tris = Vec::new();
            let mut shs = Vec::new();
            for j in 0..n {
                for i in 0..n {
                    let origin = [i as i64, j as i64, k as i64];
                    let corner_above: [bool; 8] = std::array::from_fn(|c| {
                        let o = corner_offset(c as u8);
                        above(grid.value_at([origin[0] + o[0], origin[1] + o[1], origin[2] + o[2]]))
                    });
                    if corner_above.iter().all(|&x| x) || corner_above.iter().all(|&x| !x) {
                        continue;
                    }
                    for (ti, tet) in tets.iter().enumerate() {
                        let mut mask = 0u8;
                        for (q, &c) in tet.iter().enumerate() {
                            if corner_above[c as usize] {
                                mask |= 1 << q;
                            }
                        }
                        for tmpl in &table[ti][mask as usize] {
                            let mut tri = [0u32; 3];
                            let mut lift = [[0i32; 3]; 3];
                            for (q, &(a, b)) in tmpl.iter().enumerate() {
                                let (lo, hi) = if a & !b == 0 { (a, b) } else { (b, a) };
                                debug_assert!(lo & !hi == 0);
                                let lo_off = corner_offset(lo);
                                let p = [origin[0] + lo_off[0], origin[1] + lo_off[1], origin[2] + lo_off[2]];
                                let (w, wl) = grid.wrapped(p);
                                let g = w[0] + n * (w[1] + n * w[2]);
                                let slot = g * 7 + dir_slot(hi ^ lo);
                                let v = index[slot];
                                debug_assert!(v != u32::MAX);
                                tri[q] = v;
                                lift[q] = add(wl, vertex_offset[v as usize]);
                            }
                            tris.push(tri);
                            shs.push([sub(lift[1], lift[0]), sub(lift[2], lift[1]), sub(lift[0], lift[2])]);
                        }
                    }
                }
            }
            (tris, shs)
        })
        .collect();

    let mut triangles = Vec::new();
    let mut shifts = Vec::new();
    for (t, s) in per_slab {
        triangles.extend(t);
        shifts.extend(s);
    }

    Ok(TorusMesh {
        vertices,
        triangles,
        shifts,
        resolution: n,
        requested_level: level,
        level: used,
    })
}

/// Parameter t ∈ (0,1) of the field root on the grid edge `base → base + dir`
/// (grid units), by Illinois-modified regula falsi.
fn edge_root(
    field: &PeriodicField,
    level: f64,
    base: [f64; 3],
    dir: [i64; 3],
    inv: f64,
    fa: f64,
    fb: f64,
) -> f64 {
    let eval = |t: f64| {
        let p = [
            (base[0] + t * dir[0] as f64) * inv,
            (base[1] + t * dir[1] as f64) * inv,
            (base[2] + t * dir[2] as f64) * inv,
        ];
        field.value(&p) - level
    };
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let (mut fa, mut fb) = (fa, fb);
    let mut side = 0i32;
    let mut t = fa / (fa - fb);
    for _ in 0..60 {
        t = (a * fb - b * fa) / (fb - fa);
        if !(t > a && t < b) {
            t = 0.5 * (a + b);
        }
        let ft = eval(t);
        if ft == 0.0 || (b - a) < 1e-15 {
            break;
        }
        if (ft > 0.0) == (fb > 0.0) {
            b = t;
            fb = ft;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = t;
            fa = ft;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if ft.abs() < 1e-15 {
            break;
        }
    }
    t.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
}

/// Outcome of the structural checks every downstream module relies on.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    /// Undirected edges used by exactly one triangle.
    pub boundary_edges: Vec<(u32, u32)>,
    /// Undirected edges used by more than two triangles.
    pub nonmanifold_edges: Vec<(u32, u32)>,
    /// Directed edges appearing in two triangles with the same direction.
    pub orientation_conflicts: Vec<(u32, u32)>,
    /// Edges whose two directions do not carry opposite shifts.
    pub shift_mismatches: Vec<(u32, u32)>,
    /// Triangles whose three edge shifts do not sum to zero.
    pub unclosed_triangles: Vec<usize>,
    /// Shifts with a component outside {−1, 0, 1}.
    pub oversized_shifts: usize,
    pub level_shift: f64,
}

impl ValidationReport {
    pub fn watertight(&self) -> bool {
        self.boundary_edges.is_empty() && self.nonmanifold_edges.is_empty()
    }

    pub fn oriented(&self) -> bool {
        self.orientation_conflicts.is_empty()
    }

    pub fn shifts_antisymmetric(&self) -> bool {
        self.shift_mismatches.is_empty()
    }

    pub fn triangles_closed(&self) -> bool {
        self.unclosed_triangles.is_empty()
    }

    pub fn is_valid(&self) -> bool {
        self.watertight() && self.oriented() && self.shifts_antisymmetric() && self.triangles_closed()
    }

    pub fn summary(&self) -> String {
        format!(
            "watertight={} ({} boundary, {} non-manifold), oriented={} ({} conflicts), \
             shifts antisymmetric={} ({}), triangles closed={} ({})",
            self.watertight(),
            self.boundary_edges.len(),
            self.nonmanifold_edges.len(),
            self.oriented(),
            self.orientation_conflicts.len(),
            self.shifts_antisymmetric(),
            self.shift_mismatches.len(),
            self.triangles_closed(),
            self.unclosed_triangles.len()
        )
    }
}

pub fn validate_mesh(mesh: &TorusMesh) -> ValidationReport {
    let mut report = ValidationReport { level_shift: mesh.level_shift(), ..Default::default() };
    let mut directed: HashMap<(u32, u32), (u32, Shift)> = HashMap::with_capacity(mesh.triangles.len() * 3);
    for (t, (tri, sh)) in mesh.triangles.iter().zip(&mesh.shifts).enumerate() {
        let total = add(add(sh[0], sh[1]), sh[2]);
        if total != [0, 0, 0] {
            report.unclosed_triangles.push(t);
        }
        for k in 0..3 {
            if sh[k].iter().any(|c| c.abs() > 1) {
                report.oversized_shifts += 1;
            }
            let e = (tri[k], tri[(k + 1) % 3]);
            let entry = directed.entry(e).or_insert((0, sh[k]));
            entry.0 += 1;
        }
    }
    let mut undirected: HashMap<(u32, u32), u32> = HashMap::with_capacity(directed.len());
    for (&(a, b), &(count, shift)) in &directed {
        *undirected.entry(ordered(a, b)).or_insert(0) += count;
        if count > 1 {
            report.orientation_conflicts.push((a, b));
        }
        if let Some(&(_, back)) = directed.get(&(b, a)) {
            if a < b && add(shift, back) != [0, 0, 0] {
                report.shift_mismatches.push((a, b));
            }
        }
    }
    for (&e, &c) in &undirected {
        if c == 1 {
            report.boundary_edges.push(e);
        } else if c > 2 {
            report.nonmanifold_edges.push(e);
        }
    }
    report.boundary_edges.sort_unstable();
    report.nonmanifold_edges.sort_unstable();
    report.orientation_conflicts.sort_unstable();
    report.shift_mismatches.sort_unstable();
    report
}

/// One edge-connected piece of a level surface.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurfaceComponent {
    pub index: usize,
    pub triangles: Vec<u32>,
    pub vertices: Vec<u32>,
    pub edges: usize,
    pub euler_characteristic: i64,
    pub genus: i64,
    pub rank: usize,
}

/// Partition of the triangles by edge connectivity, each part annotated with
/// χ = V − E + T, genus and embedding rank.
pub fn split_components(mesh: &TorusMesh) -> Vec<SurfaceComponent> {
    if mesh.is_empty() {
        return Vec::new();
    }
    let nt = mesh.triangles.len();
    let mut uf = UnionFind::new(nt);
    let mut first: HashMap<(u32, u32), u32> = HashMap::with_capacity(nt * 3 / 2);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for k in 0..3 {
            let e = ordered(tri[k], tri[(k + 1) % 3]);
            match first.get(&e) {
                Some(&o) => uf.union(o as usize, t),
                None => {
                    first.insert(e, t as u32);
                }
            }
        }
    }
    let mut groups: HashMap<usize, usize> = HashMap::new();
    let mut comps: Vec<Vec<u32>> = Vec::new();
    for t in 0..nt {
        let r = uf.find(t);
        let id = *groups.entry(r).or_insert_with(|| {
            comps.push(Vec::new());
            comps.len() - 1
        });
        comps[id].push(t as u32);
    }
    let topo = HalfEdges::build(mesh).ok();
    comps
        .into_iter()
        .enumerate()
        .map(|(index, triangles)| {
            let mut vertices: Vec<u32> =
                triangles.iter().flat_map(|&t| mesh.triangles[t as usize]).collect();
            vertices.sort_unstable();
            vertices.dedup();
            let mut edges: Vec<(u32, u32)> = triangles
                .iter()
                .flat_map(|&t| {
                    let tri = mesh.triangles[t as usize];
                    (0..3).map(move |k| ordered(tri[k], tri[(k + 1) % 3]))
                })
                .collect();
            edges.sort_unstable();
            edges.dedup();
            let euler = vertices.len() as i64 - edges.len() as i64 + triangles.len() as i64;
            let genus = (2 - euler) / 2;
            let rank = topo
                .as_ref()
                .map(|h| homology::generator_push_forward_rank(h, &triangles))
                .unwrap_or(0);
            SurfaceComponent {
                index,
                edges: edges.len(),
                euler_characteristic: euler,
                genus,
                triangles,
                vertices,
                rank,
            }
        })
        .collect()
}

/// Rank of H₁(component) → H₁(T³) = ℤ³.
pub fn embedding_rank(mesh: &TorusMesh, component: &SurfaceComponent) -> Result<usize> {
    let topo = HalfEdges::build(mesh)?;
    Ok(homology::generator_push_forward_rank(&topo, &component.triangles))
}

/// OBJ text of the mesh unrolled into a `copies[0] × copies[1] × copies[2]` block
/// of fundamental cells. Vertex `v` of copy `c` is written once per copy; a triangle
/// of copy `c` uses its edge shifts to pick the copies of its other corners, wrapping
/// at the outer faces of the block, so the output is the same surface on the larger
/// torus and counts scale exactly with the number of copies.
pub fn export_mesh(mesh: &TorusMesh, copies: [usize; 3]) -> Result<String> {
    if copies.iter().any(|&c| c == 0) {
        return Err(Error::argument("unroll copies must be >= 1 in every direction"));
    }
    let mut out = String::new();
    out.push_str(&format!(
        "# periodic level surface, level {:?}, resolution {}, unrolled {}x{}x{}\n",
        mesh.level, mesh.resolution, copies[0], copies[1], copies[2]
    ));
    let nv = mesh.vertices.len();
    let cells: Vec<[usize; 3]> = (0..copies[2])
        .flat_map(|z| (0..copies[1]).flat_map(move |y| (0..copies[0]).map(move |x| [x, y, z])))
        .collect();
    let cell_id = |c: [usize; 3]| c[0] + copies[0] * (c[1] + copies[1] * c[2]);
    for c in &cells {
        for p in &mesh.vertices {
            out.push_str(&format!(
                "v {:.9} {:.9} {:.9}\n",
                p[0] + c[0] as f64,
                p[1] + c[1] as f64,
                p[2] + c[2] as f64
            ));
        }
    }
    for c in &cells {
        for t in 0..mesh.triangles.len() {
            let lifts = mesh.corner_lifts(t);
            let tri = mesh.triangles[t];
            let mut f = [0usize; 3];
            for k in 0..3 {
                let mut cc = [0usize; 3];
                for a in 0..3 {
                    cc[a] = (c[a] as i64 + lifts[k][a] as i64).rem_euclid(copies[a] as i64) as usize;
                }
                f[k] = cell_id(cc) * nv + tri[k] as usize + 1;
            }
            out.push_str(&format!("f {} {} {}\n", f[0], f[1], f[2]));
        }
    }
    Ok(out)
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), rank: vec![0; n] }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}
