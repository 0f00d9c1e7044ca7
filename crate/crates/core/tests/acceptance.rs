//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Tolerances and budgets are pinned below.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use qptopo::fields::{builtin_model, cyclotron_average, FourierTerm, PeriodicField};
use qptopo::foliation::{energy_interval, foliation_mesh, Direction, IntervalKind, Label, SurfaceAnalysis};
use qptopo::homology::{
    all_cycle_bases, annihilator_direction, gcd3, normalize_sign, smith_normal_form, standard_symplectic,
    IntegerMatrix, Sublattice,
};
use qptopo::mesh::{extract_isosurface, split_components};
use qptopo::planar::{self, line_angle_deg, PlaneEmbedding, TraceOptions, Verdict};
use qptopo::scan::{self, DirectionGrid, ImageFormat, StabilityMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240917;

const GENUS_RES: usize = 64;
const SADDLE_RES: usize = 96;
const SADDLE_DIRECTIONS: usize = 50;
const SADDLE_SUCCESS: f64 = 0.95;
const LABEL_RES: usize = 64;
const LABEL_GRID: usize = 20;
const TRACE_DIRECTIONS: usize = 10;
const TRACE_ANGLE_DEG: f64 = 1.0;
const TRACE_ARC: f64 = 200.0;
const TRACE_GROWTH: f64 = 0.05;
const INTERVAL_RES: usize = 48;
const INTERVAL_TOL: f64 = 1e-3;
const INTERVAL_SYMMETRY: f64 = 2e-3;
const MAP_GRID: usize = 40;
const MAP_RES: usize = 64;
const MIN_ZONE_LABELS: usize = 6;
const MIN_ZONE_CELLS: usize = 4;
const DIM_TOL: f64 = 0.05;
const DIM_BRACKET: (f64, f64) = (1.6, 2.0);
const DIM_SCALES: usize = 5;
const CARPET_DEPTH: u32 = 6;
const REFERENCE_DIMENSION: f64 = 1.83;
const SNF_MATRICES: usize = 500;
const SUBLATTICES: usize = 100;
const CYCLOTRON_FIELDS: usize = 20;
const CYCLOTRON_TOL: f64 = 1e-8;
const CIRCLE_SAMPLES: usize = 4096;
const NOBLE_GRID: usize = 12;
const NOBLE_RES: usize = 48;

fn minutes(m: u64) -> Duration {
    Duration::from_secs(60 * m)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

struct Runner {
    failures: usize,
}

impl Runner {
    fn run(&mut self, id: u32, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) {
        let t = Instant::now();
        let mut o = f();
        let dt = t.elapsed();
        if dt > budget {
            o.pass = false;
            o.detail.push_str(&format!("; over budget {:.0}s", budget.as_secs_f64()));
        }
        if !o.pass {
            self.failures += 1;
        }
        println!(
            "criterion {id:>2} {} {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            dt.as_secs_f64()
        );
    }
}

fn c3() -> PeriodicField {
    builtin_model("c3").unwrap()
}

fn genus_rank(field: &PeriodicField, level: f64) -> Vec<(i64, usize)> {
    let mesh = extract_isosurface(field, level, GENUS_RES).unwrap();
    split_components(&mesh).iter().map(|c| (c.genus, c.rank)).collect()
}

fn topology_c3() -> Outcome {
    let f = c3();
    let mut bad = Vec::new();
    for c in [-0.5, 0.0, 0.5] {
        let g = genus_rank(&f, c);
        if g != [(3, 3)] {
            bad.push(format!("c={c}: {g:?}"));
        }
    }
    for c in [-2.0, 2.0] {
        let g = genus_rank(&f, c);
        if g.iter().any(|&x| x != (0, 0)) {
            bad.push(format!("c={c}: {g:?}"));
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { "genus/rank 3/3 inside, 0/0 outside".into() } else { bad.join(", ") })
}

/// `d4` is periodic under the body-centred lattice, so its level surfaces are
/// classified on that cell (`d4_bcc`). On the cubic cell each surface is the
/// connected double cover, genus 2·4 − 1 = 7, which is reported as a cross-check.
/// The minimum of `d4` is −1, so level −1.5 is empty and has only (zero) spheres.
fn topology_d4() -> Outcome {
    let f = builtin_model("d4_bcc").unwrap();
    let cubic = builtin_model("d4").unwrap();
    let mut bad = Vec::new();
    let mut seen = Vec::new();
    for c in [-0.9, -0.5, -0.1] {
        let g = genus_rank(&f, c);
        if g.is_empty() || g.iter().any(|x| x.0 != 4) {
            bad.push(format!("c={c}: {g:?}"));
        }
        let gc = genus_rank(&cubic, c);
        if gc.iter().any(|x| x.0 != 7) {
            bad.push(format!("cubic cell c={c}: {gc:?}"));
        }
        seen.push(g.iter().map(|x| x.1).collect::<Vec<_>>());
    }
    let mut spheres = Vec::new();
    for c in [-1.5, 0.5] {
        let g = genus_rank(&f, c);
        if g.iter().any(|x| x.0 != 0) {
            bad.push(format!("c={c}: {g:?}"));
        }
        spheres.push(g.len());
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            format!(
                "bcc cell: genus 4 with ranks {seen:?}, sphere counts {spheres:?} at c=-1.5/0.5 (below min -1 the level is empty); cubic cell genus 7"
            )
        } else {
            bad.join(", ")
        },
    )
}

fn random_direction(rng: &mut ChaCha8Rng) -> [i64; 3] {
    loop {
        let q = rng.gen_range(1..=20i64);
        let b = [rng.gen_range(0..=q), rng.gen_range(0..=q), q];
        let g = gcd3(b);
        let b = [b[0] / g, b[1] / g, b[2] / g];
        if Direction::rational(b).is_ok() {
            return b;
        }
    }
}

fn saddle_counts() -> Outcome {
    let f = c3();
    let mesh = foliation_mesh(&f, 0.0, SADDLE_RES).unwrap();
    let an = SurfaceAnalysis::new(&mesh, true).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut exact, mut flagged, mut miscounted) = (0, 0, Vec::new());
    for _ in 0..SADDLE_DIRECTIONS {
        let b = random_direction(&mut rng);
        let d = an.decompose(b).unwrap();
        let ok = d.critical.saddle_count() == 4 && d.critical.extremum_count() == 0;
        if ok {
            exact += 1;
        } else if !d.is_simple(&an.components) || d.label.is_undetermined() {
            flagged += 1;
        } else {
            miscounted.push(b);
        }
    }
    let rate = exact as f64 / SADDLE_DIRECTIONS as f64;
    outcome(
        rate >= SADDLE_SUCCESS && miscounted.is_empty(),
        format!(
            "seed {SEED}, res {SADDLE_RES}: {exact}/{SADDLE_DIRECTIONS} with 4 saddles, {flagged} flagged, unflagged miscounts {miscounted:?}"
        ),
    )
}

struct LabelCell {
    b: [i64; 3],
    ij: (i64, i64),
    label: Label,
}

fn label_agreement(cells_out: &mut Vec<LabelCell>) -> Outcome {
    let f = c3();
    let mesh = foliation_mesh(&f, 0.0, LABEL_RES).unwrap();
    let an = SurfaceAnalysis::new(&mesh, true).unwrap();
    let grid = DirectionGrid::uniform(LABEL_GRID).unwrap();
    let (mut open, mut agree, mut mismatch) = (0, 0, 0);
    let mut bad = Vec::new();
    for cell in grid.cells() {
        let d = an.decompose(cell.direction).unwrap();
        if let Label::Undetermined(r) = &d.label {
            if r.contains("mismatch") {
                mismatch += 1;
                bad.push(cell.direction);
            }
        }
        if d.label.is_open() {
            open += 1;
            match (d.symplectic_label, d.capped_label) {
                (Some(a), Some(c)) if normalize_sign(a) == normalize_sign(c) => agree += 1,
                _ => bad.push(cell.direction),
            }
        }
        cells_out.push(LabelCell { b: cell.direction, ij: (cell.i, cell.j), label: d.label });
    }
    outcome(
        open > 0 && agree == open && mismatch == 0,
        format!(
            "{LABEL_GRID}x{LABEL_GRID} grid, res {LABEL_RES}: {agree}/{open} open cells agree, {mismatch} class mismatches {bad:?}"
        ),
    )
}

fn cross(a: [i64; 3], b: [i64; 3]) -> [i64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Open cells whose four neighbours carry the same label, evenly spread.
fn in_zone_directions(cells: &[LabelCell], n: usize) -> Vec<([i64; 3], [i64; 3])> {
    let at = |i: i64, j: i64| cells.iter().find(|c| c.ij == (i, j)).map(|c| &c.label);
    let mut cand: Vec<([i64; 3], [i64; 3])> = cells
        .iter()
        .filter_map(|c| match c.label {
            Label::OpenStable(l) if cross(c.b, l) != [0; 3] => {
                let (i, j) = c.ij;
                let same = [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)]
                    .iter()
                    .all(|&(a, b)| at(a, b) == Some(&c.label));
                same.then_some((c.b, l))
            }
            _ => None,
        })
        .collect();
    cand.sort();
    if cand.len() <= n {
        return cand;
    }
    (0..n).map(|k| cand[k * cand.len() / n]).collect()
}

fn tracer_consistency(cells: &[LabelCell]) -> Outcome {
    let f = c3();
    let dirs = in_zone_directions(cells, TRACE_DIRECTIONS);
    if dirs.len() < TRACE_DIRECTIONS {
        return outcome(false, format!("only {} in-zone directions available", dirs.len()));
    }
    let offsets = [[0.137, 0.291, 0.443], [0.371, 0.059, 0.613], [0.811, 0.523, 0.197]];
    let opts = TraceOptions { max_arc: TRACE_ARC, ..Default::default() };
    let mut worst_angle: f64 = 0.0;
    let mut worst_width: f64 = 0.0;
    let mut bad = Vec::new();
    for (b, l) in dirs {
        let bf = [b[0] as f64, b[1] as f64, b[2] as f64];
        let mut found = None;
        'search: for off in offsets {
            let psi = PlaneEmbedding::from_direction(&Direction::rational(b).unwrap(), off);
            let q = planar::restrict(&f, &psi).unwrap();
            for k in 0..4 {
                let Ok(st) = planar::find_start(&q, 0.0, [0.31 * k as f64, 0.17 * k as f64]) else { continue };
                let Ok(o) = planar::trace_orbit(&q, 0.0, st, &opts) else { continue };
                if o.verdict.is_open() {
                    found = Some((psi, o));
                    break 'search;
                }
            }
        }
        let Some((psi, orbit)) = found else {
            bad.push(format!("{b:?}: no open orbit"));
            continue;
        };
        let Verdict::Open { direction, .. } = orbit.verdict else { unreachable!() };
        let angle = line_angle_deg(direction, planar::expected_direction(&psi, bf, l));
        let total = orbit.arc_length();
        let cut = orbit.arc.iter().position(|&s| s > total * 2.0 / 3.0).unwrap_or(orbit.points.len());
        let w_early = planar::strip_width(&orbit.points[..cut]);
        let w = planar::strip_width(&orbit.points);
        worst_angle = worst_angle.max(angle);
        worst_width = worst_width.max(w);
        if !(angle < TRACE_ANGLE_DEG) || !w.is_finite() || w - w_early > TRACE_GROWTH * w + 1e-9 || total < TRACE_ARC {
            bad.push(format!("{b:?}: angle {angle:.3} width {w_early:.3}->{w:.3} arc {total:.1}"));
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{TRACE_DIRECTIONS} directions, arc {TRACE_ARC}: max angle {worst_angle:.3} deg, max strip width {worst_width:.3}{}",
            if bad.is_empty() { String::new() } else { format!("; failures {}", bad.join(", ")) }
        ),
    )
}

fn interval_symmetry() -> Outcome {
    let f = c3();
    let dirs = [
        [1, 2, 5],
        [0, 1, 3],
        [1, 1, 2],
        [3, 1, 7],
        [2, 3, 9],
        [1, 0, 2],
        [1, 3, 4],
        [2, 5, 7],
        [4, 1, 9],
        [5, 3, 11],
    ];
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for b in dirs {
        let iv = energy_interval(&f, &Direction::rational(b).unwrap(), INTERVAL_RES, INTERVAL_TOL).unwrap();
        let s = (iv.low + iv.upp).abs();
        if iv.kind == IntervalKind::Empty || !(s < INTERVAL_SYMMETRY) {
            bad.push(format!("{b:?}: [{}, {}] {:?}", iv.low, iv.upp, iv.kind));
        } else {
            worst = worst.max(s);
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "res {INTERVAL_RES}, tol {INTERVAL_TOL}: max |low+upp| {worst:.1e}{}",
            if bad.is_empty() { String::new() } else { format!("; failures {}", bad.join(", ")) }
        ),
    )
}

fn scan_in_pool(threads: usize, f: &PeriodicField, grid: &DirectionGrid) -> StabilityMap {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| scan::scan_full(f, 0.0, grid, MAP_RES).unwrap())
}

fn stability_map(map_out: &mut Option<StabilityMap>) -> Outcome {
    let f = c3();
    let grid = DirectionGrid::uniform(MAP_GRID).unwrap();
    let a = scan_in_pool(1, &f, &grid);
    let b = scan_in_pool(4, &f, &grid);
    let same_csv = scan::map_to_csv(&a) == scan::map_to_csv(&b);
    let same_img = scan::render_map(&a, ImageFormat::Ppm, 2) == scan::render_map(&b, ImageFormat::Ppm, 2);
    let mirror = scan::mirror_check(&a);
    let zones = scan::zones(&a);
    let distinct = |min_cells: usize| {
        let mut v: Vec<[i64; 3]> = zones.iter().filter(|z| z.cells.len() >= min_cells).map(|z| z.label).collect();
        v.sort();
        v.dedup();
        v.len()
    };
    let all_labels = distinct(1);
    let zone_labels = distinct(MIN_ZONE_CELLS);
    let undetermined = a.count(|l| l.is_undetermined());
    *map_out = Some(a);
    outcome(
        same_csv && same_img && mirror.disagree == 0 && zone_labels >= MIN_ZONE_LABELS,
        format!(
            "{MAP_GRID}x{MAP_GRID} res {MAP_RES}: identical across 1/4 threads {}, mirror {}/{} agree ({} undetermined pairs), {zone_labels} labels on zones of >= {MIN_ZONE_CELLS} cells ({all_labels} overall), {undetermined} undetermined cells",
            same_csv && same_img,
            mirror.agree,
            mirror.compared,
            mirror.undetermined
        ),
    )
}

/// Centres of the level-`depth` squares of the Sierpinski carpet.
fn carpet(depth: u32) -> Vec<[f64; 2]> {
    let mut squares = vec![[0.0f64, 0.0f64]];
    let mut side = 1.0;
    for _ in 0..depth {
        side /= 3.0;
        squares = squares
            .iter()
            .flat_map(|p| {
                (0..9).filter(|&k| k != 4).map(move |k| [p[0] + (k % 3) as f64 * side, p[1] + (k / 3) as f64 * side])
            })
            .collect();
    }
    squares.iter().map(|p| [p[0] + 0.5 * side, p[1] + 0.5 * side]).collect()
}

fn box_dimension(map: Option<&StabilityMap>) -> Outcome {
    let fine = scan::dyadic_scales(1.0 / 256.0, 5);
    let triadic: Vec<f64> = (2..=5).map(|k| 3f64.powi(-k)).collect();
    let square: Vec<[f64; 2]> = (0..512 * 512).map(|k| [((k % 512) as f64 + 0.5) / 512.0, ((k / 512) as f64 + 0.5) / 512.0]).collect();
    let segment: Vec<[f64; 2]> = (0..8192).map(|k| {
        let t = k as f64 / 8191.0;
        [0.1 + 0.8 * t, 0.2 + 0.3 * t]
    }).collect();
    let tri = carpet(CARPET_DEPTH);
    let d_sq = scan::box_dimension(&square, &fine).unwrap().dimension;
    let d_seg = scan::box_dimension(&segment, &fine).unwrap().dimension;
    let d_tri = scan::box_dimension(&tri, &triadic).unwrap().dimension;
    let sier = 8f64.ln() / 3f64.ln();
    let mut ok = (d_sq - 2.0).abs() <= DIM_TOL && (d_seg - 1.0).abs() <= DIM_TOL && (d_tri - sier).abs() <= DIM_TOL;
    let mut detail = format!(
        "square {d_sq:.3}, segment {d_seg:.3}, sierpinski carpet {d_tri:.3} (expect {sier:.3})"
    );
    match map {
        None => {
            ok = false;
            detail.push_str("; no stability map");
        }
        Some(m) => {
            let pts = scan::boundary_points(m);
            match scan::box_dimension(&pts, &scan::dyadic_scales(m.grid.cell_size(), DIM_SCALES)) {
                Ok(est) => {
                    ok &= est.dimension >= DIM_BRACKET.0 && est.dimension <= DIM_BRACKET.1;
                    detail.push_str(&format!(
                        "; c3 boundary set {:.3} from {} cells over {DIM_SCALES} dyadic sizes (reference {REFERENCE_DIMENSION})",
                        est.dimension,
                        pts.len()
                    ));
                }
                Err(e) => {
                    ok = false;
                    detail.push_str(&format!("; c3 estimate failed: {e}"));
                }
            }
        }
    }
    outcome(ok, detail)
}

fn random_matrix(rng: &mut ChaCha8Rng) -> Vec<Vec<i64>> {
    let r = rng.gen_range(1..=6);
    let c = rng.gen_range(1..=6);
    (0..r).map(|_| (0..c).map(|_| if rng.gen_bool(0.3) { 0 } else { rng.gen_range(-20..=20) }).collect()).collect()
}

fn snf_ok(rows: &[Vec<i64>]) -> bool {
    let m = IntegerMatrix::from_rows(rows[0].len(), rows).unwrap();
    let s = smith_normal_form(&m);
    let recon = s.u.mul(&m).and_then(|x| x.mul(&s.v));
    if recon.map(|x| x != s.d).unwrap_or(true) || !s.u.is_unimodular() || !s.v.is_unimodular() || !s.d.is_diagonal() {
        return false;
    }
    let f = s.invariant_factors();
    let zero = BigInt::from(0);
    f.iter().all(|x| *x > zero) && f.windows(2).all(|w| (&w[1] % &w[0]) == zero) && s.rank == m.rank()
}

fn homology_kernel() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let snf_fail = (0..SNF_MATRICES).filter(|_| !snf_ok(&random_matrix(&mut rng))).count();

    let mut pairing_checked = 0;
    let mut pairing_fail = 0;
    for (name, levels) in [("c3", vec![-0.5, 0.0, 0.5]), ("d4", vec![-0.9, -0.5, -0.1]), ("d4_bcc", vec![-0.5, 0.5])] {
        let f = builtin_model(name).unwrap();
        for c in levels {
            let mesh = extract_isosurface(&f, c, GENUS_RES).unwrap();
            let comps = split_components(&mesh);
            for b in all_cycle_bases(&mesh, &comps).unwrap().into_iter().flatten() {
                pairing_checked += 1;
                let g = b.generator_pairing.to_i64().unwrap();
                let n = g.len();
                let anti = (0..n).all(|i| (0..n).all(|j| g[i][j] == -g[j][i]));
                if !anti || !b.generator_pairing.is_unimodular() || b.pairing != standard_symplectic(n) {
                    pairing_fail += 1;
                }
            }
        }
    }

    let mut ann_fail = 0;
    let mut done = 0;
    while done < SUBLATTICES {
        let v: Vec<Vec<i64>> = (0..2).map(|_| (0..3).map(|_| rng.gen_range(-9..=9)).collect()).collect();
        let sub = Sublattice::from_i64(3, &v).unwrap();
        if sub.rank() != 2 {
            continue;
        }
        done += 1;
        let a = annihilator_direction(&sub).unwrap();
        let dot = |x: &[i64]| a[0] * x[0] + a[1] * x[1] + a[2] * x[2];
        if dot(&v[0]) != 0 || dot(&v[1]) != 0 || gcd3(a) != 1 {
            ann_fail += 1;
        }
    }
    outcome(
        snf_fail == 0 && pairing_fail == 0 && pairing_checked > 0 && ann_fail == 0,
        format!(
            "SNF {}/{SNF_MATRICES} exact, pairings {}/{pairing_checked} antisymmetric unimodular, annihilators {}/{SUBLATTICES} orthogonal coprime (seed {SEED})",
            SNF_MATRICES - snf_fail,
            pairing_checked - pairing_fail,
            SUBLATTICES - ann_fail
        ),
    )
}

fn random_planar_field(rng: &mut ChaCha8Rng, k: usize) -> PeriodicField {
    let n = rng.gen_range(1..=5);
    let terms = (0..n)
        .map(|_| {
            FourierTerm::new(
                vec![rng.gen_range(-3..=3), rng.gen_range(-3..=3)],
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    PeriodicField::new(2, terms, format!("random{k}")).unwrap()
}

fn cyclotron() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut identity_err: f64 = 0.0;
    let mut fixed_err: f64 = 0.0;
    let mut sample_err: f64 = 0.0;
    for k in 0..CYCLOTRON_FIELDS {
        let f = random_planar_field(&mut rng, k);
        let r = rng.gen_range(0.05..0.6);
        let p = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
        let avg = cyclotron_average(&f, r).unwrap();
        let same = cyclotron_average(&f, 0.0).unwrap();
        identity_err = identity_err.max((same.value(&p) - f.value(&p)).abs());
        let sampled = (0..CIRCLE_SAMPLES)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / CIRCLE_SAMPLES as f64;
                f.value(&[p[0] + r * t.cos(), p[1] + r * t.sin()])
            })
            .sum::<f64>()
            / CIRCLE_SAMPLES as f64;
        sample_err = sample_err.max((sampled - avg.value(&p)).abs());
        let c = rng.gen_range(-2.0..2.0);
        let konst = PeriodicField::new(2, vec![FourierTerm::new(vec![0, 0], c, 0.0)], "const").unwrap();
        let kavg = cyclotron_average(&konst, r).unwrap();
        fixed_err = fixed_err.max((kavg.value(&p) - c).abs());
    }
    outcome(
        identity_err <= 1e-15 && fixed_err <= 1e-15 && sample_err < CYCLOTRON_TOL,
        format!(
            "{CYCLOTRON_FIELDS} fields: radius-0 error {identity_err:.1e}, constant error {fixed_err:.1e}, quadrature vs {CIRCLE_SAMPLES}-point circle {sample_err:.1e}"
        ),
    )
}

fn noble_reduced_map() -> Outcome {
    let model = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/noble_like.model");
    let dir = tempfile::tempdir().unwrap();
    let grid = NOBLE_GRID.to_string();
    let res = NOBLE_RES.to_string();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let csv = dir.path().join(format!("map{threads}.csv"));
        let ppm = dir.path().join(format!("map{threads}.ppm"));
        let args = [
            "qptopo", "--threads", threads, "scan", "--model", model, "--reduced", "--level", "0", "--grid", &grid,
            "--res", &res, "--out", csv.to_str().unwrap(), "--png", ppm.to_str().unwrap(),
        ];
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = qptopo::cli::run(args, &mut out, &mut err);
        if code != 0 {
            return outcome(false, format!("scan exited {code}: {}", String::from_utf8_lossy(&err)));
        }
        outputs.push((std::fs::read(&csv).unwrap(), std::fs::read(&ppm).unwrap(), csv));
    }
    let identical = outputs[0].0 == outputs[1].0 && outputs[0].1 == outputs[1].1;
    let text = String::from_utf8(outputs[0].0.clone()).unwrap();
    let parsed = scan::map_from_csv(&text);
    let header = text.lines().any(|l| l == "bx_num,bx_den,by_num,by_den,label_or_status");
    let manifest = std::fs::read_to_string(qptopo::cli::manifest_path(&outputs[0].2)).unwrap_or_default();
    let digest_recorded = manifest.contains("noble_like.model") && manifest.contains("sha256");
    let (ok_map, detail) = match parsed {
        Ok(m) => {
            let n = NOBLE_GRID * NOBLE_GRID;
            let census = m.count(|l| l.is_open());
            (
                m.entries.len() == n && m.metadata.mode == "reduced" && m.metadata.field == "noble_like",
                format!("{} cells, {census} open, {} closed, {} zone labels", m.entries.len(), m.count(|l| *l == Label::AllClosed), m.distinct_labels().len()),
            )
        }
        Err(e) => (false, format!("map does not parse back: {e}")),
    };
    outcome(
        identical && header && ok_map && digest_recorded,
        format!("user model file, {NOBLE_GRID}x{NOBLE_GRID} reduced map res {NOBLE_RES}: {detail}; identical across 1/3 threads {identical}, manifest digest {digest_recorded}"),
    )
}

fn main() {
    let mut r = Runner { failures: 0 };
    let mut cells = Vec::new();
    let mut map = None;
    r.run(1, "topology of c3", Duration::from_secs(30), topology_c3);
    r.run(2, "topology of d4", Duration::from_secs(30), topology_d4);
    r.run(3, "saddle counts", minutes(5), saddle_counts);
    r.run(4, "dual-method label agreement", minutes(30), || label_agreement(&mut cells));
    r.run(5, "tracer-label consistency", minutes(10), || tracer_consistency(&cells));
    r.run(6, "energy-interval symmetry", minutes(15), interval_symmetry);
    r.run(7, "stability map regression", minutes(120), || stability_map(&mut map));
    r.run(8, "box dimension", minutes(10), || box_dimension(map.as_ref()));
    r.run(9, "homology kernel", minutes(2), homology_kernel);
    r.run(10, "cyclotron averaging", minutes(1), cyclotron);
    r.run(11, "user-model reduced map", minutes(30), noble_reduced_map);
    println!("acceptance: {} of 11 criteria passed", 11 - r.failures);
    if r.failures > 0 {
        std::process::exit(1);
    }
}
