//! Level curves of quasiperiodic functions traced directly in a plane.
//!
//! A plane `ψ(x, y) = a + x·u + y·v` in ℝⁿ (n = 3 or 4) restricts a periodic
//! field to a quasiperiodic function `q(x, y) = F(ψ(x, y))`. Its level curves are
//! followed by predictor–corrector continuation and classified as closed, open
//! (confined to a strip around a straight line) or undetermined at the given arc
//! budget. This module shares no code with the mesh pipeline and serves as its
//! oracle.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::PeriodicField;
use crate::foliation::Direction;

/// Default arc budget, in field periods.
pub const DEFAULT_MAX_ARC: f64 = 200.0;
pub const MIN_STEP: f64 = 1e-4;
pub const MAX_STEP: f64 = 1e-2;
/// Closure: re-entry radius in steps, and the largest tangent deviation.
pub const CLOSURE_STEPS: f64 = 2.0;
pub const CLOSURE_ANGLE_DEG: f64 = 10.0;
/// Strip test: largest admissible width, in field periods.
pub const MAX_STRIP_WIDTH: f64 = 3.0;
/// Relative growth of the strip width over the final third still counted as saturated.
pub const STRIP_GROWTH: f64 = 0.05;
/// Starts with `|∇q|` below this multiple of the amplitude sum are rejected.
pub const DEGENERATE_GRADIENT: f64 = 1e-8;

const TURN_MAX: f64 = 0.05;

/// Affine plane `a + x·u + y·v` in ℝⁿ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlaneEmbedding {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub offset: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl PlaneEmbedding {
    /// Explicit basis; it is re-orthonormalized and must already be orthonormal to 1e-6.
    pub fn new(u: Vec<f64>, v: Vec<f64>, offset: Vec<f64>) -> Result<Self> {
        let n = u.len();
        if !(n == 3 || n == 4) || v.len() != n || offset.len() != n {
            return Err(Error::argument("plane basis and offset must all have length 3 or 4"));
        }
        if u.iter().chain(&v).chain(&offset).any(|x| !x.is_finite()) {
            return Err(Error::argument("plane data must be finite"));
        }
        let gram = [dot(&u, &u) - 1.0, dot(&v, &v) - 1.0, dot(&u, &v)];
        if gram.iter().any(|g| g.abs() > 1e-6) {
            return Err(Error::argument("plane basis is not orthonormal"));
        }
        let nu = dot(&u, &u).sqrt();
        let u: Vec<f64> = u.iter().map(|x| x / nu).collect();
        let c = dot(&u, &v);
        let mut v: Vec<f64> = v.iter().zip(&u).map(|(y, x)| y - c * x).collect();
        let nv = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= nv);
        Ok(PlaneEmbedding { u, v, offset })
    }

    /// Plane through `offset` with the given normal, basis chosen so that `u × v = n̂`.
    pub fn from_normal(normal: [f64; 3], offset: [f64; 3]) -> Result<Self> {
        let d = Direction::real(normal)?;
        Ok(Self::from_unit_normal(d.unit(), offset))
    }

    pub fn from_direction(direction: &Direction, offset: [f64; 3]) -> Self {
        Self::from_unit_normal(direction.unit(), offset)
    }

    fn from_unit_normal(n: [f64; 3], offset: [f64; 3]) -> Self {
        // Least aligned coordinate axis, projected into the plane.
        let mut axis = 0;
        for i in 1..3 {
            if n[i].abs() < n[axis].abs() {
                axis = i;
            }
        }
        let mut u = [0.0; 3];
        u[axis] = 1.0;
        let c = n[axis];
        for i in 0..3 {
            u[i] -= c * n[i];
        }
        let nu = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
        u.iter_mut().for_each(|x| *x /= nu);
        let v = crate::fields::cross3(n, u);
        PlaneEmbedding { u: u.to_vec(), v: v.to_vec(), offset: offset.to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    /// Unit normal for planes in ℝ³.
    pub fn normal(&self) -> Option<[f64; 3]> {
        (self.dim() == 3).then(|| {
            crate::fields::cross3([self.u[0], self.u[1], self.u[2]], [self.v[0], self.v[1], self.v[2]])
        })
    }

    pub fn point(&self, p: [f64; 2]) -> Vec<f64> {
        (0..self.dim()).map(|i| self.offset[i] + p[0] * self.u[i] + p[1] * self.v[i]).collect()
    }

    /// Plane coordinates of the orthogonal projection of an ambient vector.
    pub fn project(&self, w: &[f64]) -> [f64; 2] {
        [dot(w, &self.u), dot(w, &self.v)]
    }

    pub fn orthonormality_error(&self) -> f64 {
        let e = [dot(&self.u, &self.u) - 1.0, dot(&self.v, &self.v) - 1.0, dot(&self.u, &self.v)];
        e.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

#[derive(Clone, Debug)]
struct PlanarTerm {
    amplitude: f64,
    /// ⟨k, u⟩ and ⟨k, v⟩.
    freq: [f64; 2],
    /// ⟨k, a⟩ reduced mod 1.
    shift: f64,
    phase: f64,
}

/// A field restricted to a plane.
#[derive(Clone, Debug)]
pub struct PlanarField {
    terms: Vec<PlanarTerm>,
    amplitude_sum: f64,
    pub embedding: PlaneEmbedding,
}

pub fn restrict(field: &PeriodicField, psi: &PlaneEmbedding) -> Result<PlanarField> {
    if field.dim() != psi.dim() {
        return Err(Error::argument(format!(
            "field '{}' lives on T^{} but the plane is in R^{}",
            field.name(),
            field.dim(),
            psi.dim()
        )));
    }
    let terms = field
        .terms()
        .iter()
        .map(|t| {
            let k: Vec<f64> = t.frequency.0.iter().map(|&x| x as f64).collect();
            let s = dot(&k, &psi.offset);
            PlanarTerm {
                amplitude: t.amplitude,
                freq: [dot(&k, &psi.u), dot(&k, &psi.v)],
                shift: s - s.round(),
                phase: t.phase,
            }
        })
        .collect();
    Ok(PlanarField { terms, amplitude_sum: field.amplitude_sum(), embedding: psi.clone() })
}

impl PlanarField {
    #[inline]
    fn argument(t: &PlanarTerm, p: [f64; 2]) -> f64 {
        let s = t.freq[0] * p[0] + t.freq[1] * p[1] + t.shift;
        TAU * (s - s.round()) + t.phase
    }

    pub fn value(&self, p: [f64; 2]) -> f64 {
        self.terms.iter().map(|t| t.amplitude * Self::argument(t, p).cos()).sum()
    }

    pub fn gradient(&self, p: [f64; 2]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for t in &self.terms {
            let s = -t.amplitude * TAU * Self::argument(t, p).sin();
            g[0] += s * t.freq[0];
            g[1] += s * t.freq[1];
        }
        g
    }

    pub fn amplitude_sum(&self) -> f64 {
        self.amplitude_sum
    }

    fn tolerance(&self) -> f64 {
        1e-12 * self.amplitude_sum.max(1e-300)
    }

    /// Newton projection onto `q = level` along the gradient.
    fn project(&self, mut p: [f64; 2], level: f64, iterations: usize) -> ([f64; 2], f64) {
        let tol = self.tolerance();
        let mut r = self.value(p) - level;
        for _ in 0..iterations {
            if r.abs() <= tol {
                break;
            }
            let g = self.gradient(p);
            let g2 = g[0] * g[0] + g[1] * g[1];
            if g2 == 0.0 {
                break;
            }
            p = [p[0] - r * g[0] / g2, p[1] - r * g[1] / g2];
            r = self.value(p) - level;
        }
        (p, r)
    }

    /// Unit tangent of the level curve, higher values on the right.
    fn tangent(&self, p: [f64; 2]) -> Option<[f64; 2]> {
        let g = self.gradient(p);
        let n = (g[0] * g[0] + g[1] * g[1]).sqrt();
        (n > DEGENERATE_GRADIENT * self.amplitude_sum).then(|| [g[1] / n, -g[0] / n])
    }
}

/// First regular point of `q = level` found by scanning from `near` along the
/// plane axes; used to seed traces from arbitrary points.
pub fn find_start(field: &PlanarField, level: f64, near: [f64; 2]) -> Result<[f64; 2]> {
    let threshold = 1e-3 * field.amplitude_sum;
    for dir in [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0], [0.6, 0.8]] {
        let at = |s: f64| [near[0] + s * dir[0], near[1] + s * dir[1]];
        let mut a = 0.0;
        let mut fa = field.value(at(a)) - level;
        let step = 0.005;
        while a < 20.0 {
            let b = a + step;
            let fb = field.value(at(b)) - level;
            if fa == 0.0 || fa * fb < 0.0 {
                let (mut lo, mut hi, mut flo) = (a, b, fa);
                for _ in 0..60 {
                    let m = 0.5 * (lo + hi);
                    let fm = field.value(at(m)) - level;
                    if (fm < 0.0) == (flo < 0.0) && fm != 0.0 {
                        lo = m;
                        flo = fm;
                    } else {
                        hi = m;
                    }
                }
                let p = at(0.5 * (lo + hi));
                let g = field.gradient(p);
                if (g[0] * g[0] + g[1] * g[1]).sqrt() > threshold {
                    return Ok(p);
                }
            }
            a = b;
            fa = fb;
        }
    }
    Err(Error::DegenerateStart { grad: 0.0, threshold })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceOptions {
    pub max_arc: f64,
    pub min_step: f64,
    pub max_step: f64,
    /// Trace against the default orientation.
    pub reverse: bool,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { max_arc: DEFAULT_MAX_ARC, min_step: MIN_STEP, max_step: MAX_STEP, reverse: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Closed { length: f64 },
    Open { direction: [f64; 2], strip_width: f64 },
    Undetermined { reason: String },
}

impl Verdict {
    pub fn is_closed(&self) -> bool {
        matches!(self, Verdict::Closed { .. })
    }

    pub fn is_open(&self) -> bool {
        matches!(self, Verdict::Open { .. })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Orbit {
    pub level: f64,
    pub points: Vec<[f64; 2]>,
    /// Arc length at each point.
    #[serde(skip)]
    pub arc: Vec<f64>,
    pub verdict: Verdict,
    /// Largest `|q − level|` over the polyline.
    pub residual: f64,
    /// Drift fitted over the last half, even when the strip test fails.
    pub fitted_direction: Option<[f64; 2]>,
}

impl Orbit {
    pub fn arc_length(&self) -> f64 {
        self.arc.last().copied().unwrap_or(0.0)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y\n");
        for p in &self.points {
            s.push_str(&format!("{},{}\n", p[0], p[1]));
        }
        s
    }
}

/// Follows the level curve through (the projection of) `start` until it closes or
/// the arc budget runs out.
pub fn trace_orbit(field: &PlanarField, level: f64, start: [f64; 2], opts: &TraceOptions) -> Result<Orbit> {
    if !(opts.max_arc > 0.0 && opts.min_step > 0.0 && opts.min_step <= opts.max_step) {
        return Err(Error::argument("trace needs max_arc > 0 and 0 < min_step <= max_step"));
    }
    let threshold = DEGENERATE_GRADIENT * field.amplitude_sum;
    let grad_norm = |p: [f64; 2]| {
        let g = field.gradient(p);
        (g[0] * g[0] + g[1] * g[1]).sqrt()
    };
    let g0 = grad_norm(start);
    if g0 <= threshold {
        return Err(Error::DegenerateStart { grad: g0, threshold });
    }
    let (p0, r0) = field.project(start, level, 100);
    let g1 = grad_norm(p0);
    if g1 <= threshold || r0.abs() > 1e-9 * field.amplitude_sum.max(1.0) {
        return Err(Error::DegenerateStart { grad: g1, threshold });
    }
    let sign = if opts.reverse { -1.0 } else { 1.0 };
    let tangent = |p: [f64; 2]| field.tangent(p).map(|t| [sign * t[0], sign * t[1]]);
    let t0 = tangent(p0).ok_or(Error::DegenerateStart { grad: g1, threshold })?;

    let mut points = vec![p0];
    let mut arc = vec![0.0];
    let mut residual = r0.abs();
    let mut p = p0;
    let mut t = t0;
    let mut h = opts.max_step;
    let mut s = 0.0;
    let mut left_start = false;
    let cos_close = CLOSURE_ANGLE_DEG.to_radians().cos();
    let mut verdict = None;
    while s < opts.max_arc {
        // Midpoint predictor, Newton corrector, step halving on sharp turns.
        let (q, tq) = loop {
            let mid = [p[0] + 0.5 * h * t[0], p[1] + 0.5 * h * t[1]];
            let tm = tangent(mid);
            let attempt = tm.and_then(|tm| {
                let pred = [p[0] + h * tm[0], p[1] + h * tm[1]];
                let (q, r) = field.project(pred, level, 8);
                let tq = tangent(q)?;
                let turn = (t[0] * tq[0] + t[1] * tq[1]).clamp(-1.0, 1.0).acos();
                let ok = r.abs() <= 1e-9 * field.amplitude_sum && turn <= TURN_MAX;
                Some((q, tq, turn, ok))
            });
            match attempt {
                Some((q, tq, turn, true)) => {
                    if turn < 0.25 * TURN_MAX {
                        h = (1.5 * h).min(opts.max_step);
                    }
                    break (q, tq);
                }
                Some((q, tq, _, false)) if h <= opts.min_step => break (q, tq),
                None if h <= opts.min_step => {
                    verdict = Some(Verdict::Undetermined { reason: "ran into a critical point".into() });
                    break (p, t);
                }
                _ => h = (0.5 * h).max(opts.min_step),
            }
        };
        if verdict.is_some() {
            break;
        }
        let ds = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
        s += ds;
        residual = residual.max((field.value(q) - level).abs());
        let radius = CLOSURE_STEPS * h.max(opts.min_step);
        let dist = segment_distance(p0, p, q);
        if !left_start && dist > 2.0 * radius {
            left_start = true;
        }
        if left_start && dist < radius && t0[0] * tq[0] + t0[1] * tq[1] > cos_close {
            points.push(p0);
            arc.push(s - ds + ((p0[0] - p[0]).powi(2) + (p0[1] - p[1]).powi(2)).sqrt());
            verdict = Some(Verdict::Closed { length: *arc.last().unwrap() });
            break;
        }
        points.push(q);
        arc.push(s);
        p = q;
        t = tq;
    }
    let mut orbit = Orbit { level, points, arc, verdict: Verdict::Undetermined { reason: String::new() }, residual, fitted_direction: None };
    orbit.verdict = match verdict {
        Some(v) => v,
        None => classify_open(&mut orbit),
    };
    Ok(orbit)
}

fn segment_distance(x: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let l2 = d[0] * d[0] + d[1] * d[1];
    let s = if l2 > 0.0 { (((x[0] - a[0]) * d[0] + (x[1] - a[1]) * d[1]) / l2).clamp(0.0, 1.0) } else { 0.0 };
    ((a[0] + s * d[0] - x[0]).powi(2) + (a[1] + s * d[1] - x[1]).powi(2)).sqrt()
}

/// Least-squares drift `dp/ds` over the points with arc length at least `from`.
fn drift(points: &[[f64; 2]], arc: &[f64], from: f64) -> Option<[f64; 2]> {
    let idx: Vec<usize> = (0..points.len()).filter(|&i| arc[i] >= from).collect();
    if idx.len() < 3 {
        return None;
    }
    let n = idx.len() as f64;
    let ms = idx.iter().map(|&i| arc[i]).sum::<f64>() / n;
    let mx = idx.iter().map(|&i| points[i][0]).sum::<f64>() / n;
    let my = idx.iter().map(|&i| points[i][1]).sum::<f64>() / n;
    let (mut sxx, mut sx, mut sy) = (0.0, 0.0, 0.0);
    for &i in &idx {
        let ds = arc[i] - ms;
        sxx += ds * ds;
        sx += ds * (points[i][0] - mx);
        sy += ds * (points[i][1] - my);
    }
    (sxx > 0.0).then(|| [sx / sxx, sy / sxx])
}

fn classify_open(orbit: &mut Orbit) -> Verdict {
    let total = orbit.arc_length();
    let Some(v) = drift(&orbit.points, &orbit.arc, 0.5 * total) else {
        return Verdict::Undetermined { reason: "trace too short to fit a drift".into() };
    };
    let speed = (v[0] * v[0] + v[1] * v[1]).sqrt();
    if speed < 0.05 {
        return Verdict::Undetermined { reason: format!("arc budget exhausted without drift (speed {speed:.3})") };
    }
    let d = [v[0] / speed, v[1] / speed];
    orbit.fitted_direction = Some(d);
    let cut = orbit.arc.partition_point(|&a| a <= 2.0 * total / 3.0);
    let early = strip_width(&orbit.points[..cut.max(3)]);
    let width = strip_width(&orbit.points);
    if width >= MAX_STRIP_WIDTH {
        return Verdict::Undetermined { reason: format!("strip width {width:.3} too large") };
    }
    if width - early > STRIP_GROWTH * width + 1e-9 {
        return Verdict::Undetermined {
            reason: format!("strip width still growing ({early:.4} to {width:.4} over the final third)"),
        };
    }
    Verdict::Open { direction: d, strip_width: width }
}

/// Convex hull, counter-clockwise, by the monotone chain.
fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut p: Vec<[f64; 2]> = points.to_vec();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
            if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    hull
}

/// Width of the narrowest strip containing all points.
pub fn strip_width(points: &[[f64; 2]]) -> f64 {
    let hull = convex_hull(points);
    let n = hull.len();
    if n < 3 {
        return 0.0;
    }
    // Rotating calipers over hull edges.
    let mut best = f64::INFINITY;
    let mut j = 1;
    let dist = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        let d = [b[0] - a[0], b[1] - a[1]];
        ((c[0] - a[0]) * d[1] - (c[1] - a[1]) * d[0]).abs() / (d[0] * d[0] + d[1] * d[1]).sqrt()
    };
    for i in 0..n {
        let a = hull[i];
        let b = hull[(i + 1) % n];
        while dist(a, b, hull[(j + 1) % n]) >= dist(a, b, hull[j]) {
            j = (j + 1) % n;
            if j == i {
                break;
            }
        }
        best = best.min(dist(a, b, hull[j]));
    }
    best
}

#[derive(Clone, Debug, Serialize)]
pub struct ChaosProbeReport {
    pub arc_budgets: Vec<f64>,
    /// Running transverse spread of the chosen trace at each budget.
    pub spreads: Vec<f64>,
    /// Slope of log spread against log arc length.
    pub growth_exponent: Option<f64>,
    /// Starts that produced a trace (the rest were degenerate).
    pub traced: usize,
    pub closed: usize,
}

/// Transverse spread growth of the longest open trace, for a report only.
pub fn chaos_probe(
    field: &PlanarField,
    level: f64,
    starts: &[[f64; 2]],
    arc_budgets: &[f64],
    opts: &TraceOptions,
) -> Result<ChaosProbeReport> {
    if arc_budgets.is_empty() || arc_budgets.windows(2).any(|w| w[1] <= w[0]) || arc_budgets[0] <= 0.0 {
        return Err(Error::argument("arc budgets must be positive and increasing"));
    }
    let max_arc = *arc_budgets.last().unwrap();
    let o = TraceOptions { max_arc, ..*opts };
    let mut traced = 0;
    let mut closed = 0;
    let mut best: Option<(f64, Orbit)> = None;
    for &s in starts {
        let Ok(orbit) = trace_orbit(field, level, s, &o) else { continue };
        traced += 1;
        if orbit.verdict.is_closed() {
            closed += 1;
            continue;
        }
        let a = orbit.points[0];
        let b = *orbit.points.last().unwrap();
        let disp = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let key = orbit.arc_length() + 1e-9 * disp;
        if best.as_ref().map_or(true, |(k, _)| key > *k) {
            best = Some((key, orbit));
        }
    }
    if traced == 0 {
        return Err(Error::DegenerateFit("every start is degenerate".into()));
    }
    let Some((_, orbit)) = best else {
        return Ok(ChaosProbeReport {
            arc_budgets: arc_budgets.to_vec(),
            spreads: vec![0.0; arc_budgets.len()],
            growth_exponent: None,
            traced,
            closed,
        });
    };
    let d = drift(&orbit.points, &orbit.arc, 0.0).unwrap_or([1.0, 0.0]);
    let n = (d[0] * d[0] + d[1] * d[1]).sqrt().max(1e-300);
    let normal = [-d[1] / n, d[0] / n];
    let p0 = orbit.points[0];
    let mut spreads = Vec::with_capacity(arc_budgets.len());
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    let mut i = 0;
    for &budget in arc_budgets {
        while i < orbit.points.len() && orbit.arc[i] <= budget {
            let w = (orbit.points[i][0] - p0[0]) * normal[0] + (orbit.points[i][1] - p0[1]) * normal[1];
            lo = lo.min(w);
            hi = hi.max(w);
            i += 1;
        }
        spreads.push(hi - lo);
    }
    let pts: Vec<(f64, f64)> = arc_budgets
        .iter()
        .zip(&spreads)
        .filter(|(_, &s)| s > 1e-12)
        .map(|(&a, &s)| (a.ln(), s.ln()))
        .collect();
    let growth_exponent = (pts.len() >= 2).then(|| {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        if sxx > 0.0 {
            sxy / sxx
        } else {
            0.0
        }
    });
    Ok(ChaosProbeReport { arc_budgets: arc_budgets.to_vec(), spreads, growth_exponent, traced, closed })
}

/// SVG of an orbit polyline, plus its fitted asymptotic line when open.
pub fn render_orbit_svg(orbit: &Orbit, size: usize) -> String {
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in &orbit.points {
        x0 = x0.min(p[0]);
        y0 = y0.min(p[1]);
        x1 = x1.max(p[0]);
        y1 = y1.max(p[1]);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let pad = 0.05 * span;
    let scale = size as f64 / (span + 2.0 * pad);
    let map = |p: [f64; 2]| ((p[0] - x0 + pad) * scale, size as f64 - (p[1] - y0 + pad) * scale);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\""
    );
    let stride = (orbit.points.len() / 20000).max(1);
    for (k, p) in orbit.points.iter().enumerate() {
        if k % stride == 0 || k + 1 == orbit.points.len() {
            let (x, y) = map(*p);
            s.push_str(&format!("{x:.2},{y:.2} "));
        }
    }
    s.push_str("\"/>\n");
    if let Verdict::Open { direction, .. } = orbit.verdict {
        let c = orbit.points[0];
        let a = map([c[0] - 2.0 * span * direction[0], c[1] - 2.0 * span * direction[1]]);
        let b = map([c[0] + 2.0 * span * direction[0], c[1] + 2.0 * span * direction[1]]);
        s.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"red\" stroke-dasharray=\"6,4\"/>\n",
            a.0, a.1, b.0, b.1
        ));
    }
    s.push_str("</svg>\n");
    s
}

/// Expected in-plane direction of open orbits for a label: `B × ℓ` projected to the plane.
pub fn expected_direction(psi: &PlaneEmbedding, b: [f64; 3], label: [i64; 3]) -> [f64; 2] {
    let l = [label[0] as f64, label[1] as f64, label[2] as f64];
    let w = crate::fields::cross3(b, l);
    let d = psi.project(&w);
    let n = (d[0] * d[0] + d[1] * d[1]).sqrt();
    [d[0] / n, d[1] / n]
}

/// Angle between two lines, in degrees, in [0, 90].
pub fn line_angle_deg(a: [f64; 2], b: [f64; 2]) -> f64 {
    let na = (a[0] * a[0] + a[1] * a[1]).sqrt();
    let nb = (b[0] * b[0] + b[1] * b[1]).sqrt();
    let c = ((a[0] * b[0] + a[1] * b[1]) / (na * nb)).abs().min(1.0);
    c.acos().to_degrees()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{builtin_model, FourierTerm};

    const ORTHONORMAL_TOL: f64 = 1e-12;

    fn plane_z0() -> PlaneEmbedding {
        PlaneEmbedding::from_normal([0.0, 0.0, 1.0], [0.0; 3]).unwrap()
    }

    #[test]
    fn embedding_basis() {
        let p = plane_z0();
        assert_eq!(p.u, vec![1.0, 0.0, 0.0]);
        assert_eq!(p.v, vec![0.0, 1.0, 0.0]);
        let q = PlaneEmbedding::from_normal([0.0, 1.0, 3.0], [0.1, 0.2, 0.3]).unwrap();
        assert!(q.orthonormality_error() < ORTHONORMAL_TOL);
        let n = q.normal().unwrap();
        let s = 10f64.sqrt();
        assert!((n[1] - 1.0 / s).abs() < 1e-12 && (n[2] - 3.0 / s).abs() < 1e-12);
        assert!(PlaneEmbedding::new(vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0; 3]).is_err());
    }

    #[test]
    fn restriction_to_coordinate_plane() {
        let c3 = builtin_model("c3").unwrap();
        let q = restrict(&c3, &plane_z0()).unwrap();
        for &(x, y) in &[(0.1, 0.2), (0.37, -1.4), (12.3, 4.5)] {
            let e = (TAU * x).cos() + (TAU * y).cos() + 1.0;
            assert!((q.value([x, y]) - e).abs() < 1e-12);
            let g = q.gradient([x, y]);
            assert!((g[0] + TAU * (TAU * x).sin()).abs() < 1e-9);
        }
        let f4 = PeriodicField::new(4, vec![FourierTerm::new(vec![1, 0, 0, 0], 1.0, 0.0)], "x").unwrap();
        assert!(restrict(&f4, &plane_z0()).is_err());
    }

    #[test]
    fn closed_oval_near_maximum() {
        let c3 = builtin_model("c3").unwrap();
        let q = restrict(&c3, &plane_z0()).unwrap();
        let o = trace_orbit(&q, 2.0, [0.0, 0.2], &TraceOptions::default()).unwrap();
        assert!(o.verdict.is_closed(), "{:?}", o.verdict);
        assert!(o.residual < 1e-6 * q.amplitude_sum());
        let rev = trace_orbit(&q, 2.0, [0.0, 0.2], &TraceOptions { reverse: true, ..Default::default() }).unwrap();
        assert!(rev.verdict.is_closed());
        let half = TraceOptions { max_step: MAX_STEP / 2.0, ..Default::default() };
        assert!(trace_orbit(&q, 2.0, [0.0, 0.2], &half).unwrap().verdict.is_closed());
    }

    #[test]
    fn straight_lines_are_open_with_zero_width() {
        let f = PeriodicField::new(3, vec![FourierTerm::new(vec![0, 0, 1], 1.0, 0.0)], "z").unwrap();
        let psi = PlaneEmbedding::from_normal([1.0, 1.0, 0.0], [0.0; 3]).unwrap();
        let q = restrict(&f, &psi).unwrap();
        let o = trace_orbit(&q, 0.3, [0.2, 0.1], &TraceOptions { max_arc: 20.0, ..Default::default() }).unwrap();
        match o.verdict {
            Verdict::Open { direction, strip_width } => {
                // Level lines are z = const, i.e. along the plane axis orthogonal to e_z.
                let e = psi.project(&[1.0, -1.0, 0.0]);
                assert!(line_angle_deg(direction, e) < 1e-6);
                assert!(strip_width < 1e-9);
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn degenerate_start_rejected() {
        let c3 = builtin_model("c3").unwrap();
        let q = restrict(&c3, &plane_z0()).unwrap();
        assert!(matches!(
            trace_orbit(&q, 3.0, [0.0, 0.0], &TraceOptions::default()),
            Err(Error::DegenerateStart { .. })
        ));
    }

    #[test]
    fn one_dimensional_restriction() {
        // cos 2πx + cos 2πy along the line y = √2 x, with z as the second plane axis.
        let f = PeriodicField::new(
            3,
            vec![FourierTerm::new(vec![1, 0, 0], 1.0, 0.0), FourierTerm::new(vec![0, 1, 0], 1.0, 0.0)],
            "t2",
        )
        .unwrap();
        let r2 = 2f64.sqrt();
        let n = 3f64.sqrt();
        let psi = PlaneEmbedding::new(vec![1.0 / n, r2 / n, 0.0], vec![0.0, 0.0, 1.0], vec![0.0; 3]).unwrap();
        let q = restrict(&f, &psi).unwrap();
        for i in 0..100 {
            let x = 0.37 * i as f64;
            let e = (TAU * x).cos() + (TAU * r2 * x).cos();
            assert!((q.value([n * x, 0.0]) - e).abs() < 1e-9);
        }
    }

    #[test]
    fn hull_width() {
        let pts = [[0.0, 0.0], [4.0, 0.0], [4.0, 1.0], [0.0, 1.0], [2.0, 0.5]];
        assert!((strip_width(&pts) - 1.0).abs() < 1e-12);
        let line: Vec<[f64; 2]> = (0..10).map(|i| [i as f64, 2.0 * i as f64]).collect();
        assert!(strip_width(&line) < 1e-12);
    }
}
