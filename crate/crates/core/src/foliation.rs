//! Plane foliations of periodic level surfaces for rational field directions.
//!
//! For an integer direction `B` the height `b(p) = ⟨B, p⟩` is a circle-valued
//! function on the surface with period 1. Section curves `b ≡ h` are traced on the
//! mesh, classified as closed (zero class in ℤ³) or open, and the open pieces are
//! labelled by a coprime triple `ℓ` computed two independent ways: from the
//! symplectic orthogonal of the closed cylinder classes, and from the ℤ³ class of
//! each open region capped off along its boundary.

use std::collections::HashMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fields::PeriodicField;
use crate::homology::{
    annihilator_direction, cycle_basis, gcd3, normalize_sign, push_forward, symplectic_orthogonal,
    Cochain, CycleBasis,
};
use crate::mesh::{
    extract_isosurface_with, split_components, validate_mesh, ExtractOptions, Shift,
    SurfaceComponent, TorusMesh, UnionFind,
};
use crate::topology::HalfEdges;

/// Critical values of the height closer than this (on the unit circle) are merged.
pub const CRITICAL_MERGE: f64 = 1e-7;
/// Requested section heights closer than this to a critical value are moved off it.
pub const CRITICAL_SHIFT: f64 = 1e-9;
/// Largest patch grown from an extremum when looking for a cancelling saddle.
pub const CANCEL_PATCH: usize = 48;
/// Largest admissible distance of a capped 2-cycle class from an integer vector.
pub const CAP_RESIDUAL: f64 = 1e-6;

/// A point of the projective plane of field directions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Direction {
    /// Coprime integer vector, first nonzero entry positive.
    Rational([i64; 3]),
    /// Unit vector.
    Real([f64; 3]),
}

impl Direction {
    pub fn rational(v: [i64; 3]) -> Result<Self> {
        let g = gcd3(v);
        if g == 0 {
            return Err(Error::argument("direction must be nonzero"));
        }
        Ok(Direction::Rational(normalize_sign([v[0] / g, v[1] / g, v[2] / g])))
    }

    pub fn real(v: [f64; 3]) -> Result<Self> {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::argument("direction must be finite and nonzero"));
        }
        Ok(Direction::Real([v[0] / n, v[1] / n, v[2] / n]))
    }

    /// Parses `a,b,c`; all-integer input gives a rational direction.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::argument(format!("direction '{text}' must have 3 components")));
        }
        if let Ok(v) = parts.iter().map(|p| p.parse::<i64>()).collect::<std::result::Result<Vec<_>, _>>() {
            return Self::rational([v[0], v[1], v[2]]);
        }
        let v = parts
            .iter()
            .map(|p| p.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::argument(format!("direction '{text}' is not numeric")))?;
        Self::real([v[0], v[1], v[2]])
    }

    pub fn integer(&self) -> Option<[i64; 3]> {
        match self {
            Direction::Rational(v) => Some(*v),
            Direction::Real(_) => None,
        }
    }

    pub fn unit(&self) -> [f64; 3] {
        match self {
            Direction::Rational(v) => {
                let f = [v[0] as f64, v[1] as f64, v[2] as f64];
                let n = (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]).sqrt();
                [f[0] / n, f[1] / n, f[2] / n]
            }
            Direction::Real(u) => *u,
        }
    }

    /// Coordinates in the affine chart B_z = 1.
    pub fn chart(&self) -> Option<(f64, f64)> {
        let u = self.unit();
        if u[2].abs() < 1e-15 {
            None
        } else {
            Some((u[0] / u[2], u[1] / u[2]))
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Rational(v) => write!(f, "{},{},{}", v[0], v[1], v[2]),
            Direction::Real(u) => write!(f, "{},{},{}", u[0], u[1], u[2]),
        }
    }
}

fn require_rational(b: &Direction) -> Result<[i64; 3]> {
    b.integer().ok_or_else(|| {
        Error::argument("irrational directions are handled by the planar tracer, not the mesh pipeline")
    })
}

/// Topological label of a direction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    OpenStable([i64; 3]),
    AllClosed,
    Undetermined(String),
}

impl Label {
    pub fn is_open(&self) -> bool {
        matches!(self, Label::OpenStable(_))
    }

    pub fn is_undetermined(&self) -> bool {
        matches!(self, Label::Undetermined(_))
    }

    /// Compact status text: `open:a:b:c`, `closed` or `undetermined`.
    pub fn status(&self) -> String {
        match self {
            Label::OpenStable(l) => format!("open:{}:{}:{}", l[0], l[1], l[2]),
            Label::AllClosed => "closed".into(),
            Label::Undetermined(_) => "undetermined".into(),
        }
    }

    pub fn parse_status(s: &str) -> Result<Label> {
        let s = s.trim();
        match s {
            "closed" => return Ok(Label::AllClosed),
            "undetermined" => return Ok(Label::Undetermined(String::new())),
            _ => {}
        }
        let rest = s
            .strip_prefix("open:")
            .ok_or_else(|| Error::argument(format!("unknown label status '{s}'")))?;
        let v: Vec<i64> = rest
            .split(':')
            .map(|x| x.parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::argument(format!("bad label triple '{rest}'")))?;
        if v.len() != 3 {
            return Err(Error::argument(format!("bad label triple '{rest}'")));
        }
        Ok(Label::OpenStable([v[0], v[1], v[2]]))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::OpenStable(l) => write!(f, "OpenStable({},{},{})", l[0], l[1], l[2]),
            Label::AllClosed => write!(f, "AllClosed"),
            Label::Undetermined(r) => write!(f, "Undetermined({r})"),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(None)?;
        match self {
            Label::OpenStable(l) => {
                m.serialize_entry("kind", "OpenStable")?;
                m.serialize_entry("label", l)?;
            }
            Label::AllClosed => m.serialize_entry("kind", "AllClosed")?,
            Label::Undetermined(r) => {
                m.serialize_entry("kind", "Undetermined")?;
                m.serialize_entry("reason", r)?;
            }
        }
        m.end()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaddlePoint {
    pub vertex: u32,
    pub position: [f64; 3],
    /// Height modulo 1.
    pub value: f64,
    /// Number of extra sign-change pairs in the link (1 for an ordinary saddle).
    pub multiplicity: u32,
    pub index: i32,
    pub component: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CriticalSet {
    pub saddles: Vec<SaddlePoint>,
    pub maxima: Vec<u32>,
    pub minima: Vec<u32>,
    /// Extremum and saddle vertices removed as mesh-scale cancelling pairs.
    pub cancelled: Vec<(u32, u32)>,
}

impl CriticalSet {
    /// Saddles counted with multiplicity.
    pub fn saddle_count(&self) -> usize {
        self.saddles.iter().map(|s| s.multiplicity as usize).sum()
    }

    pub fn extremum_count(&self) -> usize {
        self.maxima.len() + self.minima.len()
    }

    pub fn has_degenerate_saddle(&self) -> bool {
        self.saddles.iter().any(|s| s.multiplicity > 1)
    }

    /// Saddles with multiplicity on one component.
    pub fn saddles_on(&self, component: usize) -> usize {
        self.saddles
            .iter()
            .filter(|s| s.component == component)
            .map(|s| s.multiplicity as usize)
            .sum()
    }
}

/// One connected component of a plane section.
#[derive(Clone, Debug, Serialize)]
pub struct SectionLoop {
    pub component: usize,
    pub height: f64,
    pub class3: [i64; 3],
    /// Continuous lift of the curve in ℝ³; the last point equals the first plus `class3`.
    pub points: Vec<[f64; 3]>,
    #[serde(skip)]
    pub cochain: Cochain,
    /// Undirected mesh edges (smaller half-edge id) crossed by the curve.
    #[serde(skip)]
    pub edges: Vec<u32>,
}

impl SectionLoop {
    pub fn is_open(&self) -> bool {
        self.class3 != [0, 0, 0]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Cylinder {
    pub component: usize,
    /// Sample heights (mod 1) at which this cylinder was seen.
    pub heights: Vec<f64>,
    pub core_class3: [i64; 3],
    /// Core class in the canonical basis of H₁(component).
    pub core_coordinates: Vec<i64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OpenComponent {
    pub component: usize,
    pub triangles: Vec<u32>,
    /// ℤ³ class of the region capped off along its boundary loops.
    pub two_cycle_class: Option<[i64; 3]>,
    pub residual: f64,
    pub boundary_loops: usize,
    pub open_loops: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct FoliationDecomposition {
    pub direction: [i64; 3],
    pub critical: CriticalSet,
    /// Merged critical values on [0, 1).
    pub critical_values: Vec<f64>,
    pub sample_heights: Vec<f64>,
    pub loops: Vec<SectionLoop>,
    pub cylinders: Vec<Cylinder>,
    pub open_components: Vec<OpenComponent>,
    /// ℓ from the symplectic orthogonal route, when defined.
    pub symplectic_label: Option<[i64; 3]>,
    /// ℓ from the capped open regions, when defined.
    pub capped_label: Option<[i64; 3]>,
    pub label: Label,
    pub notes: Vec<String>,
}

impl FoliationDecomposition {
    pub fn open_loop_count(&self) -> usize {
        self.loops.iter().filter(|l| l.is_open()).count()
    }

    /// True when the Morse data is clean: no degenerate saddles, no extrema on
    /// components of positive genus.
    pub fn is_simple(&self, components: &[SurfaceComponent]) -> bool {
        if self.critical.has_degenerate_saddle() {
            return false;
        }
        let mut extremal = vec![false; components.len()];
        for &v in self.critical.maxima.iter().chain(&self.critical.minima) {
            for c in components {
                if c.vertices.binary_search(&v).is_ok() {
                    extremal[c.index] = true;
                }
            }
        }
        components.iter().all(|c| c.genus == 0 || !extremal[c.index])
    }
}

/// Precomputed topology of one mesh, reused across directions.
pub struct SurfaceAnalysis<'m> {
    pub mesh: &'m TorusMesh,
    pub he: HalfEdges<'m>,
    pub components: Vec<SurfaceComponent>,
    tri_comp: Vec<u32>,
    lifts: Vec<[Shift; 3]>,
    bases: Vec<Option<CycleBasis>>,
}

impl<'m> SurfaceAnalysis<'m> {
    /// Validates the mesh and builds components; cycle bases are built when `homology` is set.
    pub fn new(mesh: &'m TorusMesh, homology: bool) -> Result<Self> {
        let report = validate_mesh(mesh);
        if !report.is_valid() {
            return Err(Error::Computation(format!("invalid mesh: {}", report.summary())));
        }
        let he = HalfEdges::build(mesh)?;
        let components = split_components(mesh);
        let mut tri_comp = vec![0u32; mesh.triangles.len()];
        for c in &components {
            for &t in &c.triangles {
                tri_comp[t as usize] = c.index as u32;
            }
        }
        let lifts = (0..mesh.triangles.len()).map(|t| mesh.corner_lifts(t)).collect();
        let mut bases = Vec::with_capacity(components.len());
        for c in &components {
            bases.push(if homology && c.genus > 0 { Some(cycle_basis(&he, c)?) } else { None });
        }
        Ok(SurfaceAnalysis { mesh, he, components, tri_comp, lifts, bases })
    }

    pub fn basis(&self, component: usize) -> Option<&CycleBasis> {
        self.bases.get(component).and_then(|b| b.as_ref())
    }

    pub fn component_of_triangle(&self, t: u32) -> usize {
        self.tri_comp[t as usize] as usize
    }

    fn heights(&self, b: [i64; 3]) -> Heights {
        let bf = [b[0] as f64, b[1] as f64, b[2] as f64];
        let h = self
            .mesh
            .vertices
            .iter()
            .map(|p| bf[0] * p[0] + bf[1] * p[1] + bf[2] * p[2])
            .collect();
        let m = self
            .lifts
            .iter()
            .map(|l| {
                let d = |s: Shift| b[0] * s[0] as i64 + b[1] * s[1] as i64 + b[2] * s[2] as i64;
                [d(l[0]), d(l[1]), d(l[2])]
            })
            .collect();
        Heights { b, h, m }
    }

    pub fn critical_points(&self, b: [i64; 3]) -> CriticalSet {
        let hs = self.heights(b);
        self.critical_with(&hs)
    }

    fn critical_with(&self, hs: &Heights) -> CriticalSet {
        let mut out = self.raw_critical(hs);
        self.cancel_pairs(hs, &mut out);
        out
    }

    /// Cancels extremum–saddle pairs whose superlevel (or sublevel) patch
    /// merges within a few vertices of the extremum.
    fn cancel_pairs(&self, hs: &Heights, crit: &mut CriticalSet) {
        let mut candidates: Vec<(f64, u32, u32, bool)> = Vec::new();
        for (list, up) in [(&crit.maxima, true), (&crit.minima, false)] {
            for &v in list.iter() {
                if let Some((u, pers)) = self.merge_saddle(hs, v, up) {
                    candidates.push((pers, v, u, up));
                }
            }
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (_, v, u, up) in candidates {
            let Some(i) = crit.saddles.iter().position(|s| s.vertex == u) else { continue };
            crit.saddles[i].multiplicity -= 1;
            crit.saddles[i].index += 1;
            if crit.saddles[i].multiplicity == 0 {
                crit.saddles.remove(i);
            }
            if up {
                crit.maxima.retain(|&x| x != v);
            } else {
                crit.minima.retain(|&x| x != v);
            }
            crit.cancelled.push((v, u));
        }
    }

    /// Grows the patch of vertices beyond the extremum `v` in height order and
    /// returns the vertex where it first meets another such patch, with the
    /// height gap, provided that happens within `CANCEL_PATCH` vertices.
    fn merge_saddle(&self, hs: &Heights, v: u32, up: bool) -> Option<(u32, f64)> {
        use std::cmp::Ordering;
        use std::collections::BinaryHeap;
        struct Key(f64, u32, u32);
        impl PartialEq for Key {
            fn eq(&self, o: &Self) -> bool {
                self.cmp(o) == Ordering::Equal
            }
        }
        impl Eq for Key {}
        impl PartialOrd for Key {
            fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
                Some(self.cmp(o))
            }
        }
        impl Ord for Key {
            fn cmp(&self, o: &Self) -> Ordering {
                self.0.total_cmp(&o.0).then(self.1.cmp(&o.1))
            }
        }
        let sign = if up { 1.0 } else { -1.0 };
        let beyond = |h: u32| hs.above(&self.he, h) == up;
        let mut lifted: HashMap<u32, f64> = HashMap::new();
        let mut inside = std::collections::HashSet::new();
        let mut heap = BinaryHeap::new();
        lifted.insert(v, 0.0);
        heap.push(Key(0.0, 0, v));
        while let Some(Key(_, _, u)) = heap.pop() {
            if inside.contains(&u) {
                continue;
            }
            let hu = lifted[&u];
            if u != v {
                let star = self.he.star(u);
                if star.iter().any(|&h| beyond(h) && !inside.contains(&self.he.dest(h))) {
                    return Some((u, sign * (lifted[&v] - hu)));
                }
            }
            inside.insert(u);
            if inside.len() > CANCEL_PATCH {
                return None;
            }
            for h in self.he.star(u) {
                let w = self.he.dest(h);
                if inside.contains(&w) {
                    continue;
                }
                let hw = hu + hs.dh(&self.he, h);
                lifted.entry(w).or_insert(hw);
                heap.push(Key(sign * hw, if up { w } else { u32::MAX - w }, w));
            }
        }
        None
    }

    fn raw_critical(&self, hs: &Heights) -> CriticalSet {
        let mut out = CriticalSet::default();
        for v in 0..self.mesh.vertices.len() as u32 {
            let start = self.he.outgoing(v);
            if start == u32::MAX {
                continue;
            }
            let first = hs.above(&self.he, start);
            let mut prev = first;
            let mut changes = 0u32;
            let mut any_below = !first;
            let mut h = self.he.rot_ccw(start);
            while h != start {
                let a = hs.above(&self.he, h);
                if a != prev {
                    changes += 1;
                }
                any_below |= !a;
                prev = a;
                h = self.he.rot_ccw(h);
            }
            if prev != first {
                changes += 1;
            }
            let k = changes / 2;
            if k == 0 {
                if any_below {
                    out.maxima.push(v);
                } else {
                    out.minima.push(v);
                }
            } else if k >= 2 {
                let t = self.he.tri(start);
                out.saddles.push(SaddlePoint {
                    vertex: v,
                    position: self.mesh.vertices[v as usize],
                    value: hs.h[v as usize].rem_euclid(1.0),
                    multiplicity: k - 1,
                    index: -((k - 1) as i32),
                    component: self.tri_comp[t as usize] as usize,
                });
            }
        }
        out
    }

    /// Section curves `⟨B,p⟩ ≡ h (mod 1)`.
    pub fn section_curves(&self, b: [i64; 3], h: f64) -> Result<Vec<SectionLoop>> {
        let hs = self.heights(b);
        let crit = self.critical_with(&hs);
        let values = merged_critical_values(&crit, &hs);
        let mut h = h.rem_euclid(1.0);
        for _ in 0..4 {
            match values.iter().find(|&&c| circle_dist(c, h) < CRITICAL_SHIFT) {
                Some(&c) => h = (c + 2.0 * CRITICAL_SHIFT).rem_euclid(1.0),
                None => break,
            }
        }
        self.sections_with(&hs, h)
    }

    fn sections_with(&self, hs: &Heights, s: f64) -> Result<Vec<SectionLoop>> {
        Ok(self.sections_detailed(hs, s)?.0)
    }

    /// Section loops plus, for every cut segment, its triangle-local geometry.
    fn sections_detailed(&self, hs: &Heights, s: f64) -> Result<(Vec<SectionLoop>, Vec<CutSegment>)> {
        let mesh = self.mesh;
        let he = &self.he;
        let q: Vec<i64> = hs.h.iter().map(|&x| (x - s).floor() as i64).collect();

        struct Seg {
            from: u32,
            to: u32,
            enter: u32,
            off_from: Shift,
            off_to: Shift,
            tri: u32,
            k: i64,
            above: u8,
            exit: u32,
        }
        let mut nodes: HashMap<(u32, i64), u32> = HashMap::new();
        let mut node_key: Vec<(u32, i64)> = Vec::new();
        let mut segs: Vec<Seg> = Vec::new();
        let mut node_of = |h: u32, k: i64, m: &[i64; 3], lifts: &[Shift; 3]| -> (u32, Shift) {
            let h0 = he.edge_key(h);
            let a = (h % 3) as usize;
            let corner = if h0 == h { a } else { (a + 1) % 3 };
            let key = (h0, k - m[corner]);
            let next = node_key.len() as u32;
            let id = *nodes.entry(key).or_insert(next);
            if id == next {
                node_key.push(key);
            }
            (id, lifts[corner])
        };
        for t in 0..mesh.triangles.len() {
            let tri = mesh.triangles[t];
            let m = &hs.m[t];
            let qq = [q[tri[0] as usize] + m[0], q[tri[1] as usize] + m[1], q[tri[2] as usize] + m[2]];
            let lo = qq[0].min(qq[1]).min(qq[2]);
            let hi = qq[0].max(qq[1]).max(qq[2]);
            for k in lo + 1..=hi {
                let above = [qq[0] >= k, qq[1] >= k, qq[2] >= k];
                let n_above = above.iter().filter(|&&x| x).count();
                let (h_in, h_out) = if n_above == 1 {
                    let i = above.iter().position(|&x| x).unwrap();
                    (3 * t + i, 3 * t + (i + 2) % 3)
                } else {
                    let i = above.iter().position(|&x| !x).unwrap();
                    (3 * t + (i + 2) % 3, 3 * t + i)
                };
                let (from, off_from) = node_of(h_in as u32, k, m, &self.lifts[t]);
                let (to, off_to) = node_of(h_out as u32, k, m, &self.lifts[t]);
                let mask = above.iter().enumerate().fold(0u8, |m, (i, &x)| m | ((x as u8) << i));
                segs.push(Seg {
                    from,
                    to,
                    enter: h_in as u32,
                    off_from,
                    off_to,
                    tri: t as u32,
                    k,
                    above: mask,
                    exit: h_out as u32,
                });
            }
        }

        let nn = node_key.len();
        let mut succ = vec![u32::MAX; nn];
        let mut indeg = vec![0u8; nn];
        for (i, sg) in segs.iter().enumerate() {
            if succ[sg.from as usize] != u32::MAX {
                return Err(Error::Computation("section is not a 1-manifold (branching)".into()));
            }
            succ[sg.from as usize] = i as u32;
            indeg[sg.to as usize] += 1;
        }
        if indeg.iter().any(|&d| d != 1) || succ.iter().any(|&s| s == u32::MAX) {
            return Err(Error::Computation("section is not a 1-manifold (open end)".into()));
        }

        let point = |n: u32| -> [f64; 3] {
            let (h0, kc) = node_key[n as usize];
            let u = he.origin(h0) as usize;
            let w = he.dest(h0) as usize;
            let sh = he.shift(h0);
            let pu = mesh.vertices[u];
            let pw = mesh.vertices[w];
            let d = [
                pw[0] + sh[0] as f64 - pu[0],
                pw[1] + sh[1] as f64 - pu[1],
                pw[2] + sh[2] as f64 - pu[2],
            ];
            let eta0 = hs.h[u];
            let dh = hs.dh(he, h0);
            let lam = if dh != 0.0 { ((s + kc as f64 - eta0) / dh).clamp(0.0, 1.0) } else { 0.5 };
            [pu[0] + lam * d[0], pu[1] + lam * d[1], pu[2] + lam * d[2]]
        };

        let mut used = vec![false; segs.len()];
        let mut seg_loop = vec![0u32; segs.len()];
        let mut loops = Vec::new();
        for start in 0..segs.len() {
            if used[start] {
                continue;
            }
            let mut cochain = Cochain::default();
            let mut edges = Vec::new();
            let mut class3 = [0i64; 3];
            let p0 = point(segs[start].from);
            let o0 = segs[start].off_from;
            let mut trans = [0i64; 3];
            let mut points = vec![[p0[0] + o0[0] as f64, p0[1] + o0[1] as f64, p0[2] + o0[2] as f64]];
            let mut i = start;
            loop {
                used[i] = true;
                seg_loop[i] = loops.len() as u32;
                let sg = &segs[i];
                cochain.cross_into(he, he.twin(sg.enter));
                edges.push(he.edge_key(sg.enter));
                for a in 0..3 {
                    let d = sg.off_to[a] as i64 - sg.off_from[a] as i64;
                    class3[a] += d;
                }
                let p = point(sg.to);
                let t = [
                    trans[0] + sg.off_to[0] as i64,
                    trans[1] + sg.off_to[1] as i64,
                    trans[2] + sg.off_to[2] as i64,
                ];
                points.push([p[0] + t[0] as f64, p[1] + t[1] as f64, p[2] + t[2] as f64]);
                let j = succ[sg.to as usize] as usize;
                // The next segment sees the shared node with its own frame offset.
                for a in 0..3 {
                    trans[a] += sg.off_to[a] as i64 - segs[j].off_from[a] as i64;
                }
                i = j;
                if i == start {
                    break;
                }
            }
            let component = self.tri_comp[he.tri(segs[start].enter) as usize] as usize;
            loops.push(SectionLoop { component, height: s, class3, points, cochain, edges });
        }
        let shifted = |p: [f64; 3], o: Shift| [p[0] + o[0] as f64, p[1] + o[1] as f64, p[2] + o[2] as f64];
        let cuts = segs
            .iter()
            .zip(&seg_loop)
            .map(|(sg, &l)| CutSegment {
                tri: sg.tri,
                k: sg.k,
                height: s,
                above: sg.above,
                enter: sg.enter,
                exit: sg.exit,
                from: sg.from,
                to: sg.to,
                start: shifted(point(sg.from), sg.off_from),
                end: shifted(point(sg.to), sg.off_to),
                section: l,
            })
            .collect();
        Ok((loops, cuts))
    }

    /// Sample heights: one per band between consecutive merged critical values.
    fn sample_heights(values: &[f64]) -> Vec<f64> {
        if values.is_empty() {
            return vec![0.5];
        }
        let n = values.len();
        (0..n)
            .map(|i| {
                let a = values[i];
                let b = if i + 1 < n { values[i + 1] } else { values[0] + 1.0 };
                (0.5 * (a + b)).rem_euclid(1.0)
            })
            .collect()
    }

    /// True when some regular section carries an open curve.
    pub fn has_open_section(&self, b: [i64; 3]) -> Result<bool> {
        let hs = self.heights(b);
        let crit = self.critical_with(&hs);
        let values = merged_critical_values(&crit, &hs);
        for s in Self::sample_heights(&values) {
            if self.sections_with(&hs, s)?.iter().any(|l| l.is_open()) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// True when the band structure between regular sections carries a lattice
    /// period: open behaviour confined to a singular level.
    pub fn has_singular_open(&self, b: [i64; 3]) -> Result<bool> {
        let hs = self.heights(b);
        let crit = self.critical_with(&hs);
        let values = merged_critical_values(&crit, &hs);
        let samples = Self::sample_heights(&values);
        let mut crossed = std::collections::HashSet::new();
        for &s in &samples {
            for l in self.sections_with(&hs, s)? {
                crossed.extend(l.edges);
            }
        }
        let nv = self.mesh.vertices.len();
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); nv];
        for h in 0..self.he.len() as u32 {
            if !crossed.contains(&self.he.edge_key(h)) {
                adj[self.he.origin(h) as usize].push(h);
            }
        }
        let mut lift: Vec<Option<[i64; 3]>> = vec![None; nv];
        for root in 0..nv {
            if lift[root].is_some() {
                continue;
            }
            lift[root] = Some([0, 0, 0]);
            let mut stack = vec![root];
            while let Some(u) = stack.pop() {
                let lu = lift[u].unwrap();
                for &h in &adj[u] {
                    let w = self.he.dest(h) as usize;
                    let s = self.he.shift(h);
                    let lw = [lu[0] + s[0] as i64, lu[1] + s[1] as i64, lu[2] + s[2] as i64];
                    match lift[w] {
                        None => {
                            lift[w] = Some(lw);
                            stack.push(w);
                        }
                        Some(x) if x != lw => return Ok(true),
                        Some(_) => {}
                    }
                }
            }
        }
        Ok(false)
    }

    pub fn decompose(&self, b: [i64; 3]) -> Result<FoliationDecomposition> {
        let g = gcd3(b);
        if g == 0 {
            return Err(Error::argument("direction must be nonzero"));
        }
        let b = normalize_sign([b[0] / g, b[1] / g, b[2] / g]);
        let hs = self.heights(b);
        let critical = self.critical_with(&hs);
        let critical_values = merged_critical_values(&critical, &hs);
        let sample_heights = Self::sample_heights(&critical_values);
        let mut loops = Vec::new();
        let mut cuts = Vec::with_capacity(sample_heights.len());
        for &s in &sample_heights {
            let (ls, mut cs) = self.sections_detailed(&hs, s)?;
            let base = loops.len() as u32;
            for c in &mut cs {
                c.section += base;
            }
            loops.extend(ls);
            cuts.push(cs);
        }
        let mut notes = Vec::new();
        for l in &loops {
            let d = l.class3[0] * b[0] + l.class3[1] * b[1] + l.class3[2] * b[2];
            if d != 0 {
                return Err(Error::Computation(format!(
                    "section class {:?} not orthogonal to B",
                    l.class3
                )));
            }
        }
        if critical.has_degenerate_saddle() {
            notes.push("degenerate saddle in the piecewise-linear height".into());
        }

        let mut dec = FoliationDecomposition {
            direction: b,
            critical,
            critical_values,
            sample_heights,
            loops,
            cylinders: Vec::new(),
            open_components: Vec::new(),
            symplectic_label: None,
            capped_label: None,
            label: Label::AllClosed,
            notes,
        };

        // Canonical coordinates of every loop on components with a basis.
        let mut coords: Vec<Option<Vec<i64>>> = Vec::with_capacity(dec.loops.len());
        let mut mismatch = false;
        for l in &dec.loops {
            match self.basis(l.component) {
                Some(basis) => {
                    let x = basis.coordinates(&l.cochain);
                    if basis.push(&x) != l.class3 {
                        mismatch = true;
                    }
                    coords.push(Some(x));
                }
                None => coords.push(None),
            }
        }

        for (l, x) in dec.loops.iter().zip(&coords) {
            if l.is_open() {
                continue;
            }
            let Some(x) = x else { continue };
            if x.iter().all(|&c| c == 0) {
                continue;
            }
            let neg: Vec<i64> = x.iter().map(|c| -c).collect();
            match dec
                .cylinders
                .iter_mut()
                .find(|c| c.component == l.component && (c.core_coordinates == *x || c.core_coordinates == neg))
            {
                Some(c) => {
                    if !c.heights.contains(&l.height) {
                        c.heights.push(l.height);
                    }
                }
                None => dec.cylinders.push(Cylinder {
                    component: l.component,
                    heights: vec![l.height],
                    core_class3: l.class3,
                    core_coordinates: x.clone(),
                }),
            }
        }

        if dec.open_loop_count() == 0 {
            dec.label = Label::AllClosed;
            return Ok(dec);
        }
        if mismatch {
            dec.label = Label::Undetermined("section class disagrees with its homology coordinates".into());
            return Ok(dec);
        }

        // Symplectic route, per component carrying open sections.
        let mut open_comps: Vec<usize> =
            dec.loops.iter().filter(|l| l.is_open()).map(|l| l.component).collect();
        open_comps.sort_unstable();
        open_comps.dedup();
        let mut sym: Result<[i64; 3], String> = Err("no component".into());
        for (n, &c) in open_comps.iter().enumerate() {
            let r = self.symplectic_component(&dec, &coords, c);
            sym = match (n, sym, r) {
                (0, _, r) => r,
                (_, Err(e), _) => Err(e),
                (_, Ok(_), Err(e)) => Err(e),
                (_, Ok(a), Ok(b)) if a == b => Ok(a),
                (_, Ok(a), Ok(b)) => Err(format!("components disagree: {a:?} vs {b:?}")),
            };
        }
        if let Ok(l) = &sym {
            dec.symplectic_label = Some(*l);
            if let Some(bad) = dec
                .loops
                .iter()
                .filter(|x| x.is_open())
                .find(|x| x.class3[0] * l[0] + x.class3[1] * l[1] + x.class3[2] * l[2] != 0)
            {
                sym = Err(format!("open section class {:?} not orthogonal to {l:?}", bad.class3));
            }
        }

        let cap = self.capped_regions(&mut dec, &cuts);
        if let Ok(l) = &cap {
            dec.capped_label = Some(*l);
        }

        dec.label = match (sym, cap) {
            (Ok(a), Ok(b)) if a == b => Label::OpenStable(a),
            (Ok(a), Ok(b)) => Label::Undetermined(format!("class mismatch: symplectic {a:?}, capped {b:?}")),
            (Err(e), _) => Label::Undetermined(format!("symplectic route: {e}")),
            (_, Err(e)) => Label::Undetermined(format!("capped route: {e}")),
        };
        Ok(dec)
    }

    fn symplectic_component(
        &self,
        dec: &FoliationDecomposition,
        coords: &[Option<Vec<i64>>],
        component: usize,
    ) -> std::result::Result<[i64; 3], String> {
        let basis = self
            .basis(component)
            .ok_or_else(|| format!("component {component} has no cycle basis"))?;
        let closed: Vec<Vec<i64>> = dec
            .loops
            .iter()
            .zip(coords)
            .filter(|(l, _)| l.component == component && !l.is_open())
            .filter_map(|(_, x)| x.clone())
            .filter(|x| x.iter().any(|&c| c != 0))
            .collect();
        let k = symplectic_orthogonal(basis, &closed).map_err(|e| e.to_string())?;
        let image = push_forward(basis, &k).map_err(|e| e.to_string())?;
        if image.rank() != 2 {
            return Err(format!("push-forward of the orthogonal has rank {}", image.rank()));
        }
        annihilator_direction(&image).map_err(|e| e.to_string())
    }

    /// Cuts the surface along every sample section, glues pieces across open
    /// sections, and assigns each open region the ℤ³ class of the closed 2-cycle
    /// obtained by capping its closed boundary sections with discs.
    fn capped_regions(
        &self,
        dec: &mut FoliationDecomposition,
        cuts: &[Vec<CutSegment>],
    ) -> std::result::Result<[i64; 3], String> {
        let mesh = self.mesh;
        let he = &self.he;
        let nt = mesh.triangles.len();
        let is_open: Vec<bool> = dec.loops.iter().map(|l| l.is_open()).collect();

        // Segments per triangle, ordered by cut value.
        let mut per_tri: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nt];
        for (j, cs) in cuts.iter().enumerate() {
            for (i, c) in cs.iter().enumerate() {
                per_tri[c.tri as usize].push((j, i));
            }
        }
        let mut base = vec![0usize; nt + 1];
        let mut pos: Vec<Vec<u32>> = cuts.iter().map(|cs| vec![0u32; cs.len()]).collect();
        for t in 0..nt {
            let list = &mut per_tri[t];
            list.sort_by(|&(ja, ia), &(jb, ib)| {
                let a = &cuts[ja][ia];
                let b = &cuts[jb][ib];
                (a.k, a.height).partial_cmp(&(b.k, b.height)).unwrap()
            });
            for (p, &(j, i)) in list.iter().enumerate() {
                pos[j][i] = p as u32;
            }
            base[t + 1] = base[t] + list.len() + 1;
        }
        let mut uf = UnionFind::new(base[nt]);
        for t in 0..nt {
            for (p, &(j, i)) in per_tri[t].iter().enumerate() {
                if is_open[cuts[j][i].section as usize] {
                    uf.union(base[t] + p, base[t] + p + 1);
                }
            }
        }
        // Across crossed edges: the two segments meeting at a node share both sides.
        for (j, cs) in cuts.iter().enumerate() {
            let mut into = vec![u32::MAX; cs.len()];
            for (i, c) in cs.iter().enumerate() {
                into[c.to as usize] = i as u32;
            }
            for (i, c) in cs.iter().enumerate() {
                let o = into[c.from as usize] as usize;
                let (ta, pa) = (c.tri as usize, pos[j][i] as usize);
                let (tb, pb) = (cs[o].tri as usize, pos[j][o] as usize);
                uf.union(base[ta] + pa, base[tb] + pb);
                uf.union(base[ta] + pa + 1, base[tb] + pb + 1);
            }
        }
        // Across edges no cut meets: the piece holding the edge on each side.
        let corner_piece = |t: usize, corner: usize| -> usize {
            let n = per_tri[t]
                .iter()
                .filter(|&&(j, i)| cuts[j][i].above & (1 << corner) != 0)
                .count();
            base[t] + n
        };
        let mut crossed = vec![false; he.len()];
        for cs in cuts {
            for c in cs {
                crossed[c.enter as usize] = true;
                crossed[c.exit as usize] = true;
            }
        }
        for h in 0..he.len() as u32 {
            let g = he.twin(h);
            if h < g && !crossed[h as usize] && !crossed[g as usize] {
                let a = corner_piece(he.tri(h) as usize, (h % 3) as usize);
                let b = corner_piece(he.tri(g) as usize, ((g % 3 + 1) % 3) as usize);
                uf.union(a, b);
            }
        }

        // Vector area of every piece.
        let mut area = vec![[0.0f64; 3]; base[nt]];
        for t in 0..nt {
            let p = mesh.lifted_triangle(t);
            let mut prev = [0.0f64; 3];
            for (n, &(j, i)) in per_tri[t].iter().enumerate() {
                let c = &cuts[j][i];
                let below = below_area(&p, c);
                for a in 0..3 {
                    area[base[t] + n][a] += below[a] - prev[a];
                }
                prev = below;
            }
            let whole = polygon_area(&p);
            let last = base[t + 1] - 1;
            for a in 0..3 {
                area[last][a] += whole[a] - prev[a];
            }
        }

        let mut open_roots: Vec<usize> = Vec::new();
        let mut open_count: HashMap<usize, usize> = HashMap::new();
        let mut counted = std::collections::HashSet::new();
        for (j, cs) in cuts.iter().enumerate() {
            for (i, c) in cs.iter().enumerate() {
                if !is_open[c.section as usize] {
                    continue;
                }
                let r = uf.find(base[c.tri as usize] + pos[j][i] as usize);
                if !open_roots.contains(&r) {
                    open_roots.push(r);
                }
                if counted.insert(c.section) {
                    *open_count.entry(r).or_insert(0) += 1;
                }
            }
        }

        let mut class_area: HashMap<usize, [f64; 3]> = open_roots.iter().map(|&r| (r, [0.0; 3])).collect();
        let mut triangles: HashMap<usize, Vec<u32>> = HashMap::new();
        for t in 0..nt {
            for piece in base[t]..base[t + 1] {
                let r = uf.find(piece);
                if let Some(acc) = class_area.get_mut(&r) {
                    for a in 0..3 {
                        acc[a] += area[piece][a];
                    }
                    let list = triangles.entry(r).or_default();
                    if list.last() != Some(&(t as u32)) {
                        list.push(t as u32);
                    }
                }
            }
        }
        // Disc caps on the closed boundary sections.
        let mut boundary: HashMap<usize, usize> = HashMap::new();
        let mut capped = std::collections::HashSet::new();
        for (j, cs) in cuts.iter().enumerate() {
            for (i, c) in cs.iter().enumerate() {
                if is_open[c.section as usize] || !capped.insert(c.section) {
                    continue;
                }
                let piece = base[c.tri as usize] + pos[j][i] as usize;
                let left = uf.find(piece + 1);
                let right = uf.find(piece);
                if left == right {
                    continue;
                }
                let cap = polygon_area(&dec.loops[c.section as usize].points);
                if let Some(acc) = class_area.get_mut(&left) {
                    for a in 0..3 {
                        acc[a] -= cap[a];
                    }
                    *boundary.entry(left).or_insert(0) += 1;
                }
                if let Some(acc) = class_area.get_mut(&right) {
                    for a in 0..3 {
                        acc[a] += cap[a];
                    }
                    *boundary.entry(right).or_insert(0) += 1;
                }
            }
        }

        let mut result: Option<[i64; 3]> = None;
        let mut error: Option<String> = None;
        for &root in &open_roots {
            let m = class_area[&root];
            let tris = triangles.remove(&root).unwrap_or_default();
            let component = tris.first().map(|&t| self.tri_comp[t as usize] as usize).unwrap_or(0);
            let rounded = [m[0].round(), m[1].round(), m[2].round()];
            let residual = (0..3).map(|a| (m[a] - rounded[a]).abs()).fold(0.0, f64::max);
            let class = [rounded[0] as i64, rounded[1] as i64, rounded[2] as i64];
            let ok = residual < CAP_RESIDUAL && gcd3(class) == 1;
            dec.open_components.push(OpenComponent {
                component,
                triangles: tris,
                two_cycle_class: if ok { Some(class) } else { None },
                residual,
                boundary_loops: boundary.get(&root).copied().unwrap_or(0),
                open_loops: open_count.get(&root).copied().unwrap_or(0),
            });
            if error.is_some() {
                continue;
            }
            if residual >= CAP_RESIDUAL {
                error = Some(format!("capped class not integral (residual {residual:.2e})"));
            } else if gcd3(class) != 1 {
                error = Some(format!("capped class {class:?} is not indivisible"));
            } else {
                let c = normalize_sign(class);
                match result {
                    None => result = Some(c),
                    Some(r) if r == c => {}
                    Some(r) => error = Some(format!("open regions disagree: {r:?} vs {c:?}")),
                }
            }
        }
        match (error, result) {
            (Some(e), _) => Err(e),
            (None, Some(r)) => Ok(r),
            (None, None) => Err("no open region".into()),
        }
    }
}

/// One straight piece of a section inside a triangle, in that triangle's frame.
struct CutSegment {
    tri: u32,
    k: i64,
    height: f64,
    /// Bit i set when corner i lies above the cut.
    above: u8,
    enter: u32,
    exit: u32,
    from: u32,
    to: u32,
    start: [f64; 3],
    end: [f64; 3],
    section: u32,
}

/// Vector area `½ Σ pᵢ × pᵢ₊₁` of a closed polygon.
fn polygon_area(p: &[[f64; 3]]) -> [f64; 3] {
    let mut acc = [0.0f64; 3];
    for i in 0..p.len() {
        let c = crate::fields::cross3(p[i], p[(i + 1) % p.len()]);
        for a in 0..3 {
            acc[a] += 0.5 * c[a];
        }
    }
    acc
}

/// Vector area of the part of a lifted triangle below a cut.
fn below_area(p: &[[f64; 3]; 3], c: &CutSegment) -> [f64; 3] {
    let mut poly: Vec<[f64; 3]> = Vec::with_capacity(4);
    for i in 0..3 {
        if c.above & (1 << i) == 0 {
            poly.push(p[i]);
        }
        if c.enter % 3 == i as u32 {
            poly.push(c.start);
        }
        if c.exit % 3 == i as u32 {
            poly.push(c.end);
        }
    }
    polygon_area(&poly)
}

struct Heights {
    b: [i64; 3],
    /// ⟨B, p⟩ at each vertex's stored position.
    h: Vec<f64>,
    /// ⟨B, lift⟩ for the corners of each triangle.
    m: Vec<[i64; 3]>,
}

impl Heights {
    #[inline]
    fn dh(&self, he: &HalfEdges, h: u32) -> f64 {
        let s = he.shift(h);
        let jump = self.b[0] * s[0] as i64 + self.b[1] * s[1] as i64 + self.b[2] * s[2] as i64;
        (self.h[he.dest(h) as usize] - self.h[he.origin(h) as usize]) + jump as f64
    }

    /// Strict order on vertices along the height, ties broken by vertex id.
    #[inline]
    fn above(&self, he: &HalfEdges, h: u32) -> bool {
        let d = self.dh(he, h);
        d > 0.0 || (d == 0.0 && he.dest(h) > he.origin(h))
    }
}

fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

fn merged_critical_values(crit: &CriticalSet, hs: &Heights) -> Vec<f64> {
    let mut v: Vec<f64> = crit
        .saddles
        .iter()
        .map(|s| s.vertex)
        .chain(crit.maxima.iter().copied())
        .chain(crit.minima.iter().copied())
        .chain(crit.cancelled.iter().flat_map(|&(a, b)| [a, b]))
        .map(|x| hs.h[x as usize].rem_euclid(1.0))
        .collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<f64> = Vec::new();
    for x in v {
        match out.last() {
            Some(&l) if x - l < CRITICAL_MERGE => {}
            _ => out.push(x),
        }
    }
    if out.len() > 1 && out[0] + 1.0 - out[out.len() - 1] < CRITICAL_MERGE {
        out.pop();
    }
    out
}

/// Mesh options used by the foliation pipeline.
pub fn foliation_mesh(field: &PeriodicField, level: f64, resolution: usize) -> Result<TorusMesh> {
    extract_isosurface_with(field, level, &ExtractOptions::exact(resolution))
}

pub fn critical_points(mesh: &TorusMesh, b: &Direction) -> Result<CriticalSet> {
    let b = require_rational(b)?;
    Ok(SurfaceAnalysis::new(mesh, false)?.critical_points(b))
}

pub fn section_curves(mesh: &TorusMesh, b: &Direction, h: f64) -> Result<Vec<SectionLoop>> {
    let b = require_rational(b)?;
    SurfaceAnalysis::new(mesh, false)?.section_curves(b, h)
}

pub fn decompose(mesh: &TorusMesh, b: &Direction) -> Result<FoliationDecomposition> {
    let b = require_rational(b)?;
    SurfaceAnalysis::new(mesh, true)?.decompose(b)
}

pub fn compute_label(field: &PeriodicField, level: f64, b: &Direction, resolution: usize) -> Result<Label> {
    let b = require_rational(b)?;
    let mesh = foliation_mesh(field, level, resolution)?;
    let analysis = match SurfaceAnalysis::new(&mesh, true) {
        Ok(a) => a,
        Err(e) => return Ok(Label::Undetermined(e.to_string())),
    };
    Ok(match analysis.decompose(b) {
        Ok(d) => d.label,
        Err(e) => Label::Undetermined(e.to_string()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum IntervalKind {
    /// Open sections on a level range of positive length.
    Interval,
    /// Open behaviour only at one singular energy: `low = upp`.
    Point,
    /// No open behaviour found at any level.
    Empty,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EnergyInterval {
    pub low: f64,
    pub upp: f64,
    pub tolerance: f64,
    pub kind: IntervalKind,
}

/// Coarse sweep size and bisection budget.
pub const SWEEP_LEVELS: usize = 64;
pub const MAX_BISECTIONS: usize = 30;

fn open_at(field: &PeriodicField, b: [i64; 3], c: f64, resolution: usize) -> Result<bool> {
    let mesh = foliation_mesh(field, c, resolution)?;
    if mesh.is_empty() {
        return Ok(false);
    }
    SurfaceAnalysis::new(&mesh, false)?.has_open_section(b)
}

fn singular_at(field: &PeriodicField, b: [i64; 3], c: f64, resolution: usize) -> Result<bool> {
    let mesh = foliation_mesh(field, c, resolution)?;
    if mesh.is_empty() {
        return Ok(false);
    }
    SurfaceAnalysis::new(&mesh, false)?.has_singular_open(b)
}

fn bisect(
    mut inside: f64,
    mut outside: f64,
    tol: f64,
    pred: &dyn Fn(f64) -> Result<bool>,
) -> Result<f64> {
    for _ in 0..MAX_BISECTIONS {
        if (inside - outside).abs() <= tol {
            break;
        }
        let mid = 0.5 * (inside + outside);
        if pred(mid)? {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(0.5 * (inside + outside))
}

/// Range of levels whose B-sections contain open curves.
pub fn energy_interval(field: &PeriodicField, b: &Direction, resolution: usize, tol: f64) -> Result<EnergyInterval> {
    let b = require_rational(b)?;
    if !(tol > 0.0) {
        return Err(Error::argument("tolerance must be positive"));
    }
    let amp = field.amplitude_sum();
    let (lo, hi) = (-amp, amp);
    let step = (hi - lo) / SWEEP_LEVELS as f64;
    let levels: Vec<f64> = (0..SWEEP_LEVELS).map(|i| lo + (i as f64 + 0.5) * step).collect();

    let run = |pred: &dyn Fn(f64) -> Result<bool>| -> Result<Option<(f64, f64)>> {
        let mut hits = Vec::with_capacity(levels.len());
        for &c in &levels {
            hits.push(pred(c)?);
        }
        let first = hits.iter().position(|&x| x);
        let last = hits.iter().rposition(|&x| x);
        let (Some(i), Some(j)) = (first, last) else { return Ok(None) };
        let below = if i == 0 { lo } else { levels[i - 1] };
        let above = if j + 1 == levels.len() { hi } else { levels[j + 1] };
        let low = bisect(levels[i], below, tol, pred)?;
        let upp = bisect(levels[j], above, tol, pred)?;
        Ok(Some((low, upp)))
    };

    if let Some((low, upp)) = run(&|c| open_at(field, b, c, resolution))? {
        return Ok(EnergyInterval { low, upp, tolerance: tol, kind: IntervalKind::Interval });
    }
    if let Some((a, z)) = run(&|c| singular_at(field, b, c, resolution))? {
        let mid = 0.5 * (a + z);
        return Ok(EnergyInterval { low: mid, upp: mid, tolerance: tol, kind: IntervalKind::Point });
    }
    Ok(EnergyInterval { low: f64::NAN, upp: f64::NAN, tolerance: tol, kind: IntervalKind::Empty })
}
