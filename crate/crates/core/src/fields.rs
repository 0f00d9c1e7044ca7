//! Periodic scalar fields given as finite Fourier series on the unit n-torus.
//!
//! Every term is `amplitude * cos(2π⟨frequency, x⟩ + phase)`, so all periods are
//! normalized to 1 and the torus is ℝⁿ/ℤⁿ. Dispersion relations and potentials
//! both live here; the level-set machinery never sees anything but this type.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer lattice frequency of one Fourier term.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FrequencyVector(pub Vec<i64>);

impl FrequencyVector {
    pub fn new(components: Vec<i64>) -> Self {
        FrequencyVector(components)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(&k, &v)| k as f64 * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|&k| (k * k) as f64).sum::<f64>().sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierTerm {
    pub frequency: FrequencyVector,
    pub amplitude: f64,
    /// Radians, kept in [0, 2π).
    pub phase: f64,
}

impl FourierTerm {
    pub fn new(frequency: Vec<i64>, amplitude: f64, phase: f64) -> Self {
        FourierTerm {
            frequency: FrequencyVector(frequency),
            amplitude,
            phase: normalize_phase(phase),
        }
    }

    /// Argument 2π⟨k, x⟩ + φ with ⟨k, x⟩ reduced mod 1 first, which makes the
    /// value exactly invariant under integer translations up to rounding of the dot product.
    #[inline]
    fn argument(&self, x: &[f64]) -> f64 {
        let t = self.frequency.dot(x);
        TAU * (t - t.round()) + self.phase
    }
}

fn normalize_phase(phase: f64) -> f64 {
    let p = phase.rem_euclid(TAU);
    if p >= TAU {
        0.0
    } else {
        p
    }
}

/// Real trigonometric polynomial on T² , T³ or T⁴.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicField {
    dim: usize,
    terms: Vec<FourierTerm>,
    name: String,
}

impl PeriodicField {
    pub fn new(dim: usize, terms: Vec<FourierTerm>, name: impl Into<String>) -> Result<Self> {
        if !(2..=4).contains(&dim) {
            return Err(Error::argument(format!("field dimension must be 2, 3 or 4, got {dim}")));
        }
        for (i, t) in terms.iter().enumerate() {
            if t.frequency.dim() != dim {
                return Err(Error::argument(format!(
                    "term {i} has frequency of dimension {} in a {dim}-dimensional field",
                    t.frequency.dim()
                )));
            }
            if !t.amplitude.is_finite() || !t.phase.is_finite() {
                return Err(Error::argument(format!("term {i} has a non-finite coefficient")));
            }
        }
        Ok(PeriodicField { dim, terms, name: name.into() })
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::new(dim, Vec::new(), "zero")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[FourierTerm] {
        &self.terms
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// The same function in coordinates of another lattice: `G(y) = F(Σ yⱼ aⱼ)` where
    /// the `aⱼ` are the rows of `basis`. The new frequencies `aⱼ·k` must be integers,
    /// i.e. the field must be periodic under that lattice.
    pub fn in_basis(&self, basis: [[f64; 3]; 3]) -> Result<PeriodicField> {
        if self.dim != 3 {
            return Err(Error::argument("basis changes are supported on T^3 only"));
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let mut k = Vec::with_capacity(3);
            for a in &basis {
                let v = t.frequency.dot(a);
                if (v - v.round()).abs() > 1e-9 {
                    return Err(Error::argument(format!(
                        "frequency {:?} is not integral on the lattice {basis:?}",
                        t.frequency.0
                    )));
                }
                k.push(v.round() as i64);
            }
            terms.push(FourierTerm { frequency: FrequencyVector(k), amplitude: t.amplitude, phase: t.phase });
        }
        PeriodicField::new(3, terms, self.name.clone())
    }

    /// Σ|amplitude|, an upper bound for |F| everywhere.
    pub fn amplitude_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.amplitude.abs()).sum()
    }

    /// Upper bound for |∇F| (Euclidean), used for residual bounds.
    pub fn lipschitz_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| TAU * t.frequency.norm() * t.amplitude.abs())
            .sum()
    }

    fn check_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::argument(format!(
                "point has dimension {} but field '{}' has dimension {}",
                point.len(),
                self.name,
                self.dim
            )));
        }
        Ok(())
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<f64> {
        self.check_point(point)?;
        Ok(self.value(point))
    }

    pub fn gradient(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.check_point(point)?;
        let mut g = vec![0.0; self.dim];
        self.add_gradient(point, &mut g);
        Ok(g)
    }

    /// Unchecked evaluation for hot loops; `point.len()` must equal `dim()`.
    #[inline]
    pub fn value(&self, point: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.amplitude * t.argument(point).cos()).sum()
    }

    /// Unchecked gradient accumulation into `out`.
    #[inline]
    pub fn add_gradient(&self, point: &[f64], out: &mut [f64]) {
        for t in &self.terms {
            let s = -t.amplitude * TAU * t.argument(point).sin();
            for (o, &k) in out.iter_mut().zip(&t.frequency.0) {
                *o += s * k as f64;
            }
        }
    }

    pub fn value3(&self, p: [f64; 3]) -> f64 {
        self.value(&p)
    }

    pub fn gradient3(&self, p: [f64; 3]) -> [f64; 3] {
        let mut g = [0.0; 3];
        self.add_gradient(&p, &mut g);
        g
    }

    /// Model-file text; `parse_model` of the result gives back an equal term list.
    pub fn to_model_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("# {}\n", self.name));
        s.push_str(&format!("dim = {}\n", self.dim));
        for t in &self.terms {
            let ks: Vec<String> = t.frequency.0.iter().map(|k| k.to_string()).collect();
            s.push_str(&format!("{}  {:?}  {:?}\n", ks.join(" "), t.amplitude, t.phase));
        }
        s
    }
}

impl fmt::Display for PeriodicField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_model_text())
    }
}

/// Parses the model file format.
///
/// One term per line, `m1 m2 m3  amplitude  [phase]`, or with a parenthesized
/// frequency `(m1,m2,m3) amplitude [phase]`. `#` starts a comment. An optional
/// header `dim = n` fixes the dimension; otherwise the first term decides it
/// (and an empty file is the zero field on T³).
pub fn parse_model(config: &str) -> Result<PeriodicField> {
    let mut dim: Option<usize> = None;
    let mut name = String::from("user");
    let mut terms = Vec::new();

    for (idx, raw) in config.lines().enumerate() {
        let line_no = idx + 1;
        let (body, comment) = match raw.find('#') {
            Some(pos) => (&raw[..pos], Some(raw[pos + 1..].trim())),
            None => (raw, None),
        };
        let body = body.trim();
        if body.is_empty() {
            if let (Some(c), true) = (comment, terms.is_empty() && name == "user") {
                if !c.is_empty() && !c.contains(char::is_whitespace) {
                    name = c.to_string();
                }
            }
            continue;
        }
        let perr = |message: String| Error::Parse { line: line_no, message };

        if let Some(rest) = body.strip_prefix("dim") {
            let rest = rest.trim_start();
            let value = rest
                .strip_prefix('=')
                .ok_or_else(|| perr("expected 'dim = n'".into()))?
                .trim();
            let n: usize = value.parse().map_err(|_| perr(format!("bad dimension '{value}'")))?;
            if !(2..=4).contains(&n) {
                return Err(perr(format!("dimension must be 2, 3 or 4, got {n}")));
            }
            if !terms.is_empty() {
                return Err(perr("'dim' header must precede the terms".into()));
            }
            if dim.is_some() {
                return Err(perr("duplicate 'dim' header".into()));
            }
            dim = Some(n);
            continue;
        }

        let (freq, coeffs): (Vec<i64>, Vec<&str>) = if let Some(inner) = body.strip_prefix('(') {
            let close = inner.find(')').ok_or_else(|| perr("unclosed '('".into()))?;
            let freq = inner[..close]
                .split(',')
                .map(|s| parse_int(s.trim()).map_err(&perr))
                .collect::<Result<Vec<_>>>()?;
            (freq, inner[close + 1..].split_whitespace().collect())
        } else {
            let tokens: Vec<&str> = body.split_whitespace().collect();
            let n = match dim {
                Some(n) => n,
                None => {
                    if tokens.len() < 3 {
                        return Err(perr("expected frequency components and an amplitude".into()));
                    }
                    // Without a header the trailing amplitude/phase pair is ambiguous;
                    // a token with a decimal point or exponent marks the amplitude.
                    let first_real = tokens
                        .iter()
                        .position(|t| parse_int(t).is_err())
                        .unwrap_or(tokens.len() - 2);
                    first_real
                }
            };
            if tokens.len() < n + 1 {
                return Err(perr(format!("expected {n} frequency components and an amplitude")));
            }
            let freq = tokens[..n]
                .iter()
                .map(|s| parse_int(s).map_err(&perr))
                .collect::<Result<Vec<_>>>()?;
            (freq, tokens[n..].to_vec())
        };

        match dim {
            Some(n) if n != freq.len() => {
                return Err(perr(format!(
                    "frequency has {} components but the field dimension is {n}",
                    freq.len()
                )))
            }
            None => {
                if !(2..=4).contains(&freq.len()) {
                    return Err(perr(format!("unsupported dimension {}", freq.len())));
                }
                dim = Some(freq.len());
            }
            _ => {}
        }
        if coeffs.is_empty() || coeffs.len() > 2 {
            return Err(perr("expected 'amplitude [phase]' after the frequency".into()));
        }
        let amplitude: f64 = coeffs[0]
            .parse()
            .map_err(|_| perr(format!("bad amplitude '{}'", coeffs[0])))?;
        let phase: f64 = match coeffs.get(1) {
            Some(p) => p.parse().map_err(|_| perr(format!("bad phase '{p}'")))?,
            None => 0.0,
        };
        if !amplitude.is_finite() || !phase.is_finite() {
            return Err(perr("non-finite coefficient".into()));
        }
        terms.push(FourierTerm::new(freq, amplitude, phase));
    }

    PeriodicField::new(dim.unwrap_or(3), terms, name)
}

fn parse_int(s: &str) -> std::result::Result<i64, String> {
    s.parse::<i64>().map_err(|_| format!("non-integer frequency component '{s}'"))
}

/// Names accepted by [`builtin_model`].
pub const BUILTIN_MODELS: &[&str] = &["c3", "d4", "d4_bcc"];

/// Primitive vectors of the body-centred cubic lattice, as rows.
pub const BCC_PRIMITIVE: [[f64; 3]; 3] = [[-0.5, 0.5, 0.5], [0.5, -0.5, 0.5], [0.5, 0.5, -0.5]];

/// `c3` is cos 2πx + cos 2πy + cos 2πz; `d4` is
/// cos 2πx cos 2πy + cos 2πy cos 2πz + cos 2πz cos 2πx expanded into six pure cosines.
/// `d4` is also periodic under the body-centred lattice; `d4_bcc` is the same
/// function on that smaller cell, where its level surfaces are half as large.
pub fn builtin_model(name: &str) -> Result<PeriodicField> {
    match name {
        "d4_bcc" => Ok(builtin_model("d4")?.in_basis(BCC_PRIMITIVE)?.with_name("d4_bcc")),
        "c3" => PeriodicField::new(
            3,
            vec![
                FourierTerm::new(vec![1, 0, 0], 1.0, 0.0),
                FourierTerm::new(vec![0, 1, 0], 1.0, 0.0),
                FourierTerm::new(vec![0, 0, 1], 1.0, 0.0),
            ],
            "c3",
        ),
        "d4" => PeriodicField::new(
            3,
            vec![
                FourierTerm::new(vec![1, -1, 0], 0.5, 0.0),
                FourierTerm::new(vec![1, 1, 0], 0.5, 0.0),
                FourierTerm::new(vec![0, 1, -1], 0.5, 0.0),
                FourierTerm::new(vec![0, 1, 1], 0.5, 0.0),
                FourierTerm::new(vec![-1, 0, 1], 0.5, 0.0),
                FourierTerm::new(vec![1, 0, 1], 0.5, 0.0),
            ],
            "d4",
        ),
        _ => Err(Error::UnknownModel {
            name: name.to_string(),
            available: BUILTIN_MODELS.join(", "),
        }),
    }
}

/// Built-in models plus user-registered extras (noble-metal fits and the like).
#[derive(Clone, Debug, Default)]
pub struct ModelRegistry {
    extras: Vec<PeriodicField>,
}

impl ModelRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, field: PeriodicField) {
        self.extras.retain(|f| f.name() != field.name());
        self.extras.push(field);
    }

    pub fn names(&self) -> Vec<String> {
        BUILTIN_MODELS
            .iter()
            .map(|s| s.to_string())
            .chain(self.extras.iter().map(|f| f.name().to_string()))
            .collect()
    }

    pub fn get(&self, name: &str) -> Result<PeriodicField> {
        if let Some(f) = self.extras.iter().find(|f| f.name() == name) {
            return Ok(f.clone());
        }
        builtin_model(name).map_err(|_| Error::UnknownModel {
            name: name.to_string(),
            available: self.names().join(", "),
        })
    }
}

/// Direct and reciprocal lattice, with ⟨a_i, l_j⟩ = 2π δ_ij (ħ = 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeBasis {
    pub direct: [[f64; 3]; 3],
    pub reciprocal: [[f64; 3]; 3],
}

impl LatticeBasis {
    /// Largest deviation of ⟨a_i, l_j⟩ from 2π δ_ij.
    pub fn duality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { TAU } else { 0.0 };
                worst = worst.max((dot3(self.reciprocal[i], self.direct[j]) - target).abs());
            }
        }
        worst
    }
}

pub fn reciprocal_basis(l1: [f64; 3], l2: [f64; 3], l3: [f64; 3]) -> Result<LatticeBasis> {
    let triple = dot3(l1, cross3(l2, l3));
    if triple.abs() <= 1e-12 {
        return Err(Error::SingularBasis(triple));
    }
    let scale = TAU / triple;
    let a = |u: [f64; 3], v: [f64; 3]| {
        let c = cross3(u, v);
        [c[0] * scale, c[1] * scale, c[2] * scale]
    };
    Ok(LatticeBasis {
        direct: [l1, l2, l3],
        reciprocal: [a(l2, l3), a(l3, l1), a(l1, l2)],
    })
}

pub(crate) fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Mean of cos(z cos θ) over the circle, i.e. (1/π)∫₀^π cos(z cos θ) dθ, by adaptive Simpson.
pub fn circle_average_factor(z: f64) -> f64 {
    if z == 0.0 {
        return 1.0;
    }
    let f = |theta: f64| (z * theta.cos()).cos();
    // Split so each panel sees at most a few oscillations.
    let panels = ((z.abs() / PI).ceil() as usize).max(1) * 4;
    let h = PI / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let a = i as f64 * h;
        let b = a + h;
        total += adaptive_simpson(&f, a, b, 1e-13 / panels as f64, 40);
    }
    total / PI
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Replaces a planar potential by its average over circles of the given radius
/// (the drift potential seen by cyclotron-orbit centers). Each term is scaled by
/// the circle-average factor of its frequency; phases and frequencies are kept.
pub fn cyclotron_average(field: &PeriodicField, radius: f64) -> Result<PeriodicField> {
    if field.dim() != 2 {
        return Err(Error::argument(format!(
            "cyclotron averaging needs a planar (dim 2) field, got dim {}",
            field.dim()
        )));
    }
    if !radius.is_finite() || radius < 0.0 {
        return Err(Error::argument(format!("radius must be finite and >= 0, got {radius}")));
    }
    let terms = field
        .terms()
        .iter()
        .map(|t| {
            let z = TAU * radius * t.frequency.norm();
            FourierTerm {
                frequency: t.frequency.clone(),
                amplitude: t.amplitude * circle_average_factor(z),
                phase: t.phase,
            }
        })
        .collect();
    PeriodicField::new(2, terms, format!("{}@r={radius}", field.name()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c3_values() {
        let c = builtin_model("c3").unwrap();
        assert!((c.evaluate(&[0.0, 0.0, 0.0]).unwrap() - 3.0).abs() < 1e-15);
        assert!((c.evaluate(&[0.5, 0.5, 0.5]).unwrap() + 3.0).abs() < 1e-15);
        let g = c.gradient(&[0.25, 0.0, 0.0]).unwrap();
        assert!((g[0] + TAU).abs() < 1e-12 && g[1].abs() < 1e-12 && g[2].abs() < 1e-12);
        let g0 = c.gradient(&[0.0, 0.0, 0.0]).unwrap();
        assert!(g0.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn bcc_cell_of_d4() {
        let d = builtin_model("d4").unwrap();
        let b = builtin_model("d4_bcc").unwrap();
        for k in 0..50 {
            let y = [0.13 * k as f64, 0.71 - 0.07 * k as f64, 0.377 * (k % 7) as f64];
            let x: Vec<f64> = (0..3).map(|i| (0..3).map(|j| y[j] * BCC_PRIMITIVE[j][i]).sum()).collect();
            assert!((b.value(&y) - d.value(&x)).abs() < 1e-12);
        }
        assert!(builtin_model("c3").unwrap().in_basis(BCC_PRIMITIVE).is_err());
    }

    #[test]
    fn d4_at_origin_and_center() {
        let d = builtin_model("d4").unwrap();
        assert_eq!(d.terms().len(), 6);
        assert!((d.evaluate(&[0.0; 3]).unwrap() - 3.0).abs() < 1e-14);
        // finite-difference oracle, step 1e-6
        let p = [0.25, 0.25, 0.25];
        let g = d.gradient(&p).unwrap();
        for i in 0..3 {
            let mut a = p;
            let mut b = p;
            a[i] += 1e-6;
            b[i] -= 1e-6;
            let fd = (d.value(&a) - d.value(&b)) / 2e-6;
            assert!((g[i] - fd).abs() < 1e-6);
            assert!(g[i].abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let c = builtin_model("c3").unwrap();
        assert!(matches!(c.evaluate(&[0.0, 0.0]), Err(Error::Argument(_))));
        assert!(c.gradient(&[0.0; 4]).is_err());
    }

    #[test]
    fn unknown_model_lists_available() {
        let err = builtin_model("nosuch").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("c3") && msg.contains("d4"), "{msg}");
    }

    #[test]
    fn parse_parenthesized_c3() {
        let f = parse_model("(1,0,0) 1.0 0.0\n(0,1,0) 1.0 0.0\n(0,0,1) 1.0 0.0\n").unwrap();
        let c = builtin_model("c3").unwrap();
        for p in [[0.1, 0.2, 0.3], [0.7, -0.4, 2.25], [0.0, 0.5, 0.9]] {
            assert!((f.value(&p) - c.value(&p)).abs() < 1e-15);
        }
    }

    #[test]
    fn parse_plain_with_header_and_comments() {
        let text = "# mymodel\ndim = 3\n1 0 0  0.5  0.0  # first\n0 -1 2 0.25 1.5\n";
        let f = parse_model(text).unwrap();
        assert_eq!(f.dim(), 3);
        assert_eq!(f.name(), "mymodel");
        assert_eq!(f.terms()[1].frequency.0, vec![0, -1, 2]);
        assert_eq!(f.terms()[1].phase, 1.5);
    }

    #[test]
    fn parse_empty_is_zero() {
        let f = parse_model("# nothing here\n").unwrap();
        assert!(f.terms().is_empty());
        assert_eq!(f.value(&[0.3, 0.1, 0.2]), 0.0);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = parse_model("(1,0,0) 1.0 0.0\n(1,0) 1.0 0.0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        let e = parse_model("dim = 3\n1 0.5 0 1.0 0.0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        let e = parse_model("dim = 3\n1 0 0 abc\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        let e = parse_model("dim = 7\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }), "{e}");
    }

    #[test]
    fn model_text_round_trip() {
        for name in BUILTIN_MODELS {
            let f = builtin_model(name).unwrap();
            let g = parse_model(&f.to_model_text()).unwrap();
            assert_eq!(f.terms(), g.terms());
            assert_eq!(g.name(), *name);
        }
    }

    #[test]
    fn registry_extras() {
        let mut reg = ModelRegistry::new();
        let f = parse_model("dim = 3\n1 1 1 0.3\n").unwrap().with_name("cu");
        reg.register(f);
        assert!(reg.get("cu").is_ok());
        assert!(reg.get("c3").is_ok());
        let err = reg.get("ag").unwrap_err().to_string();
        assert!(err.contains("cu"));
    }

    #[test]
    fn reciprocal_bases() {
        let b = reciprocal_basis([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { TAU } else { 0.0 };
                assert!((b.reciprocal[i][j] - want).abs() < 1e-15);
            }
        }
        let b = reciprocal_basis([2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]).unwrap();
        assert!((b.reciprocal[0][0] - PI).abs() < 1e-15);
        assert!((b.reciprocal[1][1] - TAU).abs() < 1e-15);
        assert!((b.reciprocal[2][2] - TAU).abs() < 1e-15);
        // bcc primitive vectors
        let b = reciprocal_basis([-0.5, 0.5, 0.5], [0.5, -0.5, 0.5], [0.5, 0.5, -0.5]).unwrap();
        assert!(b.duality_error() < 1e-12);
        assert!(matches!(
            reciprocal_basis([1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
            Err(Error::SingularBasis(_))
        ));
    }

    #[test]
    fn cyclotron_identity_and_constant() {
        let f = PeriodicField::new(
            2,
            vec![FourierTerm::new(vec![1, 2], 0.7, 0.3), FourierTerm::new(vec![0, 0], 1.25, 0.0)],
            "p",
        )
        .unwrap();
        let g = cyclotron_average(&f, 0.0).unwrap();
        assert_eq!(f.terms(), g.terms());
        let h = cyclotron_average(&f, 1.7).unwrap();
        assert_eq!(h.terms()[1].amplitude, 1.25);
        assert!(cyclotron_average(&builtin_model("c3").unwrap(), 0.1).is_err());
    }
}
