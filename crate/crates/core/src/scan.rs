//! Stability maps over a window of the direction chart `B = (x, y, 1)`.
//!
//! Each grid cell is represented by one rational direction inside it and
//! carries that direction's label. Same-label regions form zones; the cells
//! between zones (and the undetermined ones) approximate the exceptional set,
//! whose box dimension is estimated by box counting.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fields::PeriodicField;
use crate::foliation::{foliation_mesh, Label, SurfaceAnalysis};
use crate::homology::normalize_sign;

/// How a cell picks its representative rational direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellRule {
    /// Smallest common denominator `q` with `(a/q, b/q)` strictly inside the cell.
    CommonDenominator,
    /// Simplest fraction per coordinate, by Stern–Brocot descent.
    SternBrocot,
}

impl CellRule {
    pub fn name(&self) -> &'static str {
        match self {
            CellRule::CommonDenominator => "common_denominator",
            CellRule::SternBrocot => "stern_brocot",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "common_denominator" => Ok(CellRule::CommonDenominator),
            "stern_brocot" => Ok(CellRule::SternBrocot),
            _ => Err(Error::argument(format!("unknown cell rule '{s}'"))),
        }
    }
}

/// Cells `[i/m, (i+1)/m) × [j/m, (j+1)/m)` for `i0 ≤ i < i0+nx`, `j0 ≤ j < j0+ny`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DirectionGrid {
    pub cells_per_unit: u64,
    pub i0: i64,
    pub j0: i64,
    pub nx: usize,
    pub ny: usize,
    pub rule: CellRule,
}

/// Representative direction of one cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GridCell {
    pub i: i64,
    pub j: i64,
    /// Coprime integer direction `(a, b, q)` with chart point `(a/q, b/q)`.
    pub direction: [i64; 3],
}

impl GridCell {
    /// Chart coordinates as reduced fractions `(num, den)`.
    pub fn chart_fractions(&self) -> [(i64, i64); 2] {
        let q = self.direction[2];
        let red = |a: i64| {
            let g = a.gcd(&q).max(1);
            (a / g, q / g)
        };
        [red(self.direction[0]), red(self.direction[1])]
    }

    pub fn chart(&self) -> [f64; 2] {
        let q = self.direction[2] as f64;
        [self.direction[0] as f64 / q, self.direction[1] as f64 / q]
    }
}

impl DirectionGrid {
    /// The default `n × n` grid over the unit square.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::window(n as u64, 0, 0, n, n, CellRule::CommonDenominator)
    }

    pub fn window(cells_per_unit: u64, i0: i64, j0: i64, nx: usize, ny: usize, rule: CellRule) -> Result<Self> {
        if cells_per_unit == 0 || nx == 0 || ny == 0 {
            return Err(Error::argument("grid needs at least one cell and a positive cell size"));
        }
        if cells_per_unit > 1 << 20 {
            return Err(Error::argument("grid cells are too small"));
        }
        Ok(DirectionGrid { cells_per_unit, i0, j0, nx, ny, rule })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_size(&self) -> f64 {
        1.0 / self.cells_per_unit as f64
    }

    /// Row-major index: `x` varies fastest.
    pub fn index(&self, i: i64, j: i64) -> Option<usize> {
        let (di, dj) = (i - self.i0, j - self.j0);
        (di >= 0 && dj >= 0 && (di as usize) < self.nx && (dj as usize) < self.ny)
            .then(|| dj as usize * self.nx + di as usize)
    }

    pub fn cell(&self, k: usize) -> GridCell {
        let i = self.i0 + (k % self.nx) as i64;
        let j = self.j0 + (k / self.nx) as i64;
        let m = self.cells_per_unit as i64;
        let direction = match self.rule {
            CellRule::CommonDenominator => {
                let mut found = None;
                for q in 1..=2 * m {
                    if let (Some(a), Some(b)) = (inside(i, m, q), inside(j, m, q)) {
                        found = Some([a, b, q]);
                        break;
                    }
                }
                found.expect("every open cell contains its centre")
            }
            CellRule::SternBrocot => {
                let (a, p) = simplest_between(i, m);
                let (b, r) = simplest_between(j, m);
                [a * r, b * p, p * r]
            }
        };
        let g = direction[0].gcd(&direction[1]).gcd(&direction[2]);
        GridCell { i, j, direction: normalize_sign([direction[0] / g, direction[1] / g, direction[2] / g]) }
    }

    pub fn cells(&self) -> Vec<GridCell> {
        (0..self.len()).map(|k| self.cell(k)).collect()
    }
}

/// Smallest `a` with `i/m < a/q < (i+1)/m`.
fn inside(i: i64, m: i64, q: i64) -> Option<i64> {
    let a = Integer::div_floor(&(i * q), &m) + 1;
    (a * m < (i + 1) * q).then_some(a)
}

/// Simplest fraction strictly between `i/m` and `(i+1)/m`.
fn simplest_between(i: i64, m: i64) -> (i64, i64) {
    let (lo_n, lo_d, hi_n, hi_d) = (i, m, i + 1, m);
    let fl = Integer::div_floor(&lo_n, &lo_d);
    let (mut a, mut b, mut c, mut d) = (fl, 1i64, fl + 1, 1i64);
    // Mediant descent between a/b and c/d.
    loop {
        let (p, q) = (a + c, b + d);
        let above_lo = p * lo_d > lo_n * q;
        let below_hi = p * hi_d < hi_n * q;
        if above_lo && below_hi {
            return (p, q);
        }
        if above_lo {
            c = p;
            d = q;
        } else {
            a = p;
            b = q;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MapMetadata {
    pub field: String,
    /// `full` or `reduced`.
    pub mode: String,
    pub level: f64,
    pub resolution: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityMap {
    pub grid: DirectionGrid,
    pub entries: Vec<Label>,
    pub metadata: MapMetadata,
}

impl StabilityMap {
    pub fn label_at(&self, i: i64, j: i64) -> Option<&Label> {
        self.grid.index(i, j).map(|k| &self.entries[k])
    }

    pub fn distinct_labels(&self) -> Vec<[i64; 3]> {
        let mut v: Vec<[i64; 3]> = self
            .entries
            .iter()
            .filter_map(|l| match l {
                Label::OpenStable(x) => Some(*x),
                _ => None,
            })
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn count(&self, pred: impl Fn(&Label) -> bool) -> usize {
        self.entries.iter().filter(|l| pred(l)).count()
    }
}

fn label_cells(analysis: Option<&SurfaceAnalysis>, cells: &[GridCell], failure: &Option<String>, open_test: bool) -> Vec<Label> {
    cells
        .par_iter()
        .map(|c| match (analysis, failure) {
            (_, Some(e)) => Label::Undetermined(e.clone()),
            (None, None) => Label::AllClosed,
            (Some(a), None) => {
                if open_test {
                    match a.has_open_section(c.direction) {
                        Ok(false) => return Label::AllClosed,
                        Ok(true) => {}
                        Err(e) => return Label::Undetermined(e.to_string()),
                    }
                }
                match a.decompose(c.direction) {
                    Ok(d) => d.label,
                    Err(e) => Label::Undetermined(e.to_string()),
                }
            }
        })
        .collect()
}

fn scan(field: &PeriodicField, level: f64, grid: &DirectionGrid, resolution: usize, mode: &str) -> Result<StabilityMap> {
    if field.dim() != 3 {
        return Err(Error::argument("stability maps need a field on T^3"));
    }
    let mesh = foliation_mesh(field, level, resolution)?;
    let cells = grid.cells();
    let (analysis, failure) = if mesh.is_empty() {
        (None, None)
    } else {
        match SurfaceAnalysis::new(&mesh, true) {
            Ok(a) => (Some(a), None),
            Err(e) => (None, Some(e.to_string())),
        }
    };
    let entries = label_cells(analysis.as_ref(), &cells, &failure, mode == "reduced");
    Ok(StabilityMap {
        grid: grid.clone(),
        entries,
        metadata: MapMetadata { field: field.name().to_string(), mode: mode.into(), level, resolution },
    })
}

/// Label of every cell at one level; per-cell failures become `Undetermined`.
pub fn scan_full(field: &PeriodicField, level: f64, grid: &DirectionGrid, resolution: usize) -> Result<StabilityMap> {
    scan(field, level, grid, resolution, "full")
}

/// Reduced map at a Fermi level: the label where the level carries open
/// sections, `AllClosed` elsewhere.
pub fn scan_reduced(
    field: &PeriodicField,
    fermi_level: f64,
    grid: &DirectionGrid,
    resolution: usize,
) -> Result<StabilityMap> {
    scan(field, fermi_level, grid, resolution, "reduced")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZoneRecord {
    pub label: [i64; 3],
    /// Grid indices, ascending.
    pub cells: Vec<usize>,
    pub area_fraction: f64,
}

/// Edge-connected regions of equal open label, largest first.
pub fn zones(map: &StabilityMap) -> Vec<ZoneRecord> {
    let g = &map.grid;
    let n = g.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        let Label::OpenStable(l) = map.entries[start] else { continue };
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut cells = Vec::new();
        while let Some(k) = stack.pop() {
            cells.push(k);
            let (x, y) = (k % g.nx, k / g.nx);
            let mut nb = Vec::with_capacity(4);
            if x > 0 {
                nb.push(k - 1);
            }
            if x + 1 < g.nx {
                nb.push(k + 1);
            }
            if y > 0 {
                nb.push(k - g.nx);
            }
            if y + 1 < g.ny {
                nb.push(k + g.nx);
            }
            for m in nb {
                if !seen[m] && map.entries[m] == Label::OpenStable(l) {
                    seen[m] = true;
                    stack.push(m);
                }
            }
        }
        cells.sort_unstable();
        let area_fraction = cells.len() as f64 / n as f64;
        out.push(ZoneRecord { label: l, cells, area_fraction });
    }
    out.sort_by(|a, b| b.cells.len().cmp(&a.cells.len()).then(a.cells[0].cmp(&b.cells[0])));
    out
}

/// Chart points of undetermined cells and of cells with an edge neighbour of a
/// different label.
pub fn boundary_points(map: &StabilityMap) -> Vec<[f64; 2]> {
    let g = &map.grid;
    let h = g.cell_size();
    let key = |l: &Label| l.status();
    (0..g.len())
        .filter(|&k| {
            let l = &map.entries[k];
            if l.is_undetermined() {
                return true;
            }
            let (x, y) = (k % g.nx, k / g.nx);
            let mut nb = Vec::with_capacity(4);
            if x > 0 {
                nb.push(k - 1);
            }
            if x + 1 < g.nx {
                nb.push(k + 1);
            }
            if y > 0 {
                nb.push(k - g.nx);
            }
            if y + 1 < g.ny {
                nb.push(k + g.nx);
            }
            nb.iter().any(|&m| key(&map.entries[m]) != key(l))
        })
        .map(|k| {
            let i = g.i0 + (k % g.nx) as i64;
            let j = g.j0 + (k / g.nx) as i64;
            [(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxCount {
    pub size: f64,
    pub occupied: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionEstimate {
    pub dimension: f64,
    pub counts: Vec<BoxCount>,
}

/// Box sizes `base·2^k`, `k = 0..count`.
pub fn dyadic_scales(base: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| base * (1u64 << k) as f64).collect()
}

/// Least-squares slope of `log N(s)` against `log 1/s`.
pub fn box_dimension(points: &[[f64; 2]], scales: &[f64]) -> Result<DimensionEstimate> {
    if points.is_empty() {
        return Err(Error::argument("box counting needs at least one point"));
    }
    if scales.len() < 2 || scales.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::argument("box counting needs at least two positive scales"));
    }
    let smin = scales.iter().cloned().fold(f64::INFINITY, f64::min);
    let smax = scales.iter().cloned().fold(0.0, f64::max);
    if smax < 10.0 * smin * (1.0 - 1e-12) {
        return Err(Error::argument("box scales must span at least a decade"));
    }
    let mut counts = Vec::with_capacity(scales.len());
    for &s in scales {
        let mut boxes: Vec<(i64, i64)> =
            points.iter().map(|p| ((p[0] / s).floor() as i64, (p[1] / s).floor() as i64)).collect();
        boxes.sort_unstable();
        boxes.dedup();
        counts.push(BoxCount { size: s, occupied: boxes.len() });
    }
    let mut distinct: Vec<usize> = counts.iter().map(|c| c.occupied).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::DegenerateFit("fewer than two distinct box counts".into()));
    }
    let xs: Vec<f64> = counts.iter().map(|c| (1.0 / c.size).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|c| (c.occupied as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(DimensionEstimate { dimension: sxy / sxx, counts })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum TransportRegime {
    /// All in-plane conductivity components fall off as `(ω_B τ)^-2`.
    Closed,
    /// One in-plane component saturates along `axis = B × ℓ`.
    Anisotropic { axis: [i64; 3] },
    /// No stable label; possibly chaotic orbits.
    Unclassified,
}

impl TransportRegime {
    pub fn tag(&self) -> String {
        match self {
            TransportRegime::Closed => "closed: sigma_xx, sigma_yy ~ (omega_B tau)^-2".into(),
            TransportRegime::Anisotropic { axis } => {
                format!("anisotropic: one in-plane component saturates along ({},{},{})", axis[0], axis[1], axis[2])
            }
            TransportRegime::Unclassified => "unclassified/possibly chaotic".into(),
        }
    }
}

pub fn transport_regime(direction: [i64; 3], label: &Label) -> TransportRegime {
    match label {
        Label::AllClosed => TransportRegime::Closed,
        Label::Undetermined(_) => TransportRegime::Unclassified,
        Label::OpenStable(l) => {
            let b = direction;
            let c = [b[1] * l[2] - b[2] * l[1], b[2] * l[0] - b[0] * l[2], b[0] * l[1] - b[1] * l[0]];
            let g = c[0].gcd(&c[1]).gcd(&c[2]);
            if g == 0 {
                TransportRegime::Unclassified
            } else {
                TransportRegime::Anisotropic { axis: normalize_sign([c[0] / g, c[1] / g, c[2] / g]) }
            }
        }
    }
}

/// Fixed color of an open label, from a hash of its triple.
pub fn label_color(label: [i64; 3]) -> [u8; 3] {
    let h = Sha256::digest(format!("{},{},{}", label[0], label[1], label[2]).as_bytes());
    // Keep away from white and black, which mark closed and undetermined cells.
    [40 + h[0] % 176, 40 + h[1] % 176, 40 + h[2] % 176]
}

fn cell_color(l: &Label) -> [u8; 3] {
    match l {
        Label::AllClosed => [255, 255, 255],
        Label::Undetermined(_) => [0, 0, 0],
        Label::OpenStable(x) => label_color(*x),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageFormat {
    Ppm,
    Svg,
}

/// Renders one block of `scale` pixels per cell, `y` increasing upwards.
pub fn render_map(map: &StabilityMap, format: ImageFormat, scale: usize) -> Vec<u8> {
    let g = &map.grid;
    let scale = scale.max(1);
    let (w, h) = (g.nx * scale, g.ny * scale);
    match format {
        ImageFormat::Ppm => {
            let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
            out.reserve(w * h * 3);
            for row in 0..h {
                let y = g.ny - 1 - row / scale;
                for col in 0..w {
                    out.extend_from_slice(&cell_color(&map.entries[y * g.nx + col / scale]));
                }
            }
            out
        }
        ImageFormat::Svg => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" shape-rendering=\"crispEdges\">"
            );
            for (k, l) in map.entries.iter().enumerate() {
                let c = cell_color(l);
                let x = (k % g.nx) * scale;
                let y = (g.ny - 1 - k / g.nx) * scale;
                let _ = writeln!(
                    s,
                    "<rect x=\"{x}\" y=\"{y}\" width=\"{scale}\" height=\"{scale}\" fill=\"#{:02x}{:02x}{:02x}\"/>",
                    c[0], c[1], c[2]
                );
            }
            s.push_str("</svg>\n");
            s.into_bytes()
        }
    }
}

/// CSV with `#`-prefixed metadata lines, then `bx_num,bx_den,by_num,by_den,label_or_status`
/// rows in grid order.
pub fn map_to_csv(map: &StabilityMap) -> String {
    let g = &map.grid;
    let m = &map.metadata;
    let mut s = String::new();
    let _ = writeln!(s, "# field={}", m.field);
    let _ = writeln!(s, "# mode={}", m.mode);
    let _ = writeln!(s, "# level={:?}", m.level);
    let _ = writeln!(s, "# resolution={}", m.resolution);
    let _ = writeln!(s, "# cells_per_unit={}", g.cells_per_unit);
    let _ = writeln!(s, "# window={},{},{},{}", g.i0, g.j0, g.nx, g.ny);
    let _ = writeln!(s, "# rule={}", g.rule.name());
    s.push_str("bx_num,bx_den,by_num,by_den,label_or_status\n");
    for (k, l) in map.entries.iter().enumerate() {
        let [(a, p), (b, q)] = g.cell(k).chart_fractions();
        let _ = writeln!(s, "{a},{p},{b},{q},{}", l.status());
    }
    s
}

pub fn map_from_csv(text: &str) -> Result<StabilityMap> {
    let perr = |line: usize, message: String| Error::Parse { line, message };
    let mut meta: BTreeMap<String, (usize, String)> = BTreeMap::new();
    let mut rows = Vec::new();
    let mut header = false;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.trim().split_once('=') {
                meta.insert(k.trim().to_string(), (n + 1, v.trim().to_string()));
            }
            continue;
        }
        if !header {
            if line != "bx_num,bx_den,by_num,by_den,label_or_status" {
                return Err(perr(n + 1, format!("unexpected header '{line}'")));
            }
            header = true;
            continue;
        }
        rows.push((n + 1, line.to_string()));
    }
    let get = |k: &str| -> Result<&(usize, String)> {
        meta.get(k).ok_or_else(|| perr(0, format!("missing metadata '{k}'")))
    };
    let num = |k: &str| -> Result<f64> {
        let (l, v) = get(k)?;
        v.parse::<f64>().map_err(|_| perr(*l, format!("bad value for '{k}'")))
    };
    let (wl, wv) = get("window")?;
    let w: Vec<i64> = wv
        .split(',')
        .map(|x| x.trim().parse::<i64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| perr(*wl, "bad window".into()))?;
    if w.len() != 4 || w[2] <= 0 || w[3] <= 0 {
        return Err(perr(*wl, "window needs i0,j0,nx,ny".into()));
    }
    let rule = CellRule::parse(&get("rule")?.1)?;
    let grid = DirectionGrid::window(num("cells_per_unit")? as u64, w[0], w[1], w[2] as usize, w[3] as usize, rule)?;
    if rows.len() != grid.len() {
        return Err(perr(0, format!("expected {} rows, found {}", grid.len(), rows.len())));
    }
    let mut entries = Vec::with_capacity(rows.len());
    for (k, (line, row)) in rows.iter().enumerate() {
        let f: Vec<&str> = row.split(',').collect();
        if f.len() != 5 {
            return Err(perr(*line, "expected 5 columns".into()));
        }
        let v: Vec<i64> = f[..4]
            .iter()
            .map(|x| x.trim().parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| perr(*line, "bad fraction".into()))?;
        let expect = grid.cell(k).chart_fractions();
        if [(v[0], v[1]), (v[2], v[3])] != expect {
            return Err(perr(*line, format!("cell direction does not match the grid (expected {expect:?})")));
        }
        entries.push(Label::parse_status(f[4]).map_err(|e| perr(*line, e.to_string()))?);
    }
    let metadata = MapMetadata {
        field: get("field")?.1.clone(),
        mode: get("mode")?.1.clone(),
        level: num("level")?,
        resolution: num("resolution")? as usize,
    };
    Ok(StabilityMap { grid, entries, metadata })
}

/// Cells whose label under the swap `x ↔ y` disagrees with the swapped label of
/// the mirrored cell; pairs with an undetermined side are counted separately.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MirrorReport {
    pub compared: usize,
    pub agree: usize,
    pub disagree: usize,
    pub undetermined: usize,
}

pub fn mirror_check(map: &StabilityMap) -> MirrorReport {
    let g = &map.grid;
    let mut r = MirrorReport::default();
    let swap = |l: &Label| match l {
        Label::OpenStable(x) => Label::OpenStable(normalize_sign([x[1], x[0], x[2]])),
        other => other.clone(),
    };
    for k in 0..g.len() {
        let c = g.cell(k);
        let Some(m) = g.index(c.j, c.i) else { continue };
        if m <= k {
            continue;
        }
        r.compared += 1;
        let (a, b) = (&map.entries[k], &map.entries[m]);
        if a.is_undetermined() || b.is_undetermined() {
            r.undetermined += 1;
        } else if swap(a) == *b {
            r.agree += 1;
        } else {
            r.disagree += 1;
        }
    }
    r
}

/// Cells per label status.
pub fn census(map: &StabilityMap) -> HashMap<String, usize> {
    let mut h = HashMap::new();
    for l in &map.entries {
        *h.entry(l.status()).or_insert(0) += 1;
    }
    h
}
