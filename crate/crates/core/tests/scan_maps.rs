use qptopo::fields::builtin_model;
use qptopo::foliation::Label;
use qptopo::scan::{self, CellRule, DirectionGrid, ImageFormat, StabilityMap};

const RES: usize = 40;

fn scan_with(threads: usize, grid: &DirectionGrid) -> StabilityMap {
    let f = builtin_model("c3").unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| scan::scan_full(&f, 0.0, grid, RES).unwrap())
}

#[test]
fn maps_and_images_are_byte_identical() {
    let grid = DirectionGrid::uniform(8).unwrap();
    let a = scan_with(1, &grid);
    let b = scan_with(3, &grid);
    assert_eq!(scan::map_to_csv(&a), scan::map_to_csv(&b));
    for fmt in [ImageFormat::Ppm, ImageFormat::Svg] {
        assert_eq!(scan::render_map(&a, fmt, 3), scan::render_map(&b, fmt, 3));
    }
    let back = scan::map_from_csv(&scan::map_to_csv(&a)).unwrap();
    // Undetermined reasons are not stored, only the status.
    let status = |m: &StabilityMap| m.entries.iter().map(|l| l.status()).collect::<Vec<_>>();
    assert_eq!(status(&back), status(&a));
}

#[test]
fn overlapping_windows_agree_on_shared_cells() {
    let a = scan_with(1, &DirectionGrid::window(20, 0, 0, 6, 6, CellRule::CommonDenominator).unwrap());
    let b = scan_with(1, &DirectionGrid::window(20, 3, 2, 6, 6, CellRule::CommonDenominator).unwrap());
    let mut shared = 0;
    for i in 3..6 {
        for j in 2..6 {
            assert_eq!(a.label_at(i, j), b.label_at(i, j), "cell ({i},{j})");
            shared += 1;
        }
    }
    assert_eq!(shared, 12);
}

/// Labels are locally constant: a cell surrounded by its own label keeps it at
/// the four rationals of the refined grid inside the cell.
#[test]
fn zone_interiors_are_locally_constant() {
    let coarse = scan_with(1, &DirectionGrid::uniform(8).unwrap());
    let fine = scan_with(1, &DirectionGrid::uniform(16).unwrap());
    let mut checked = 0;
    for j in 1..7 {
        for i in 1..7 {
            let l = coarse.label_at(i, j).unwrap();
            if !l.is_open() {
                continue;
            }
            let interior = [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)]
                .iter()
                .all(|&(a, b)| coarse.label_at(a, b) == Some(l));
            if !interior {
                continue;
            }
            for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                assert_eq!(fine.label_at(2 * i + di, 2 * j + dj), Some(l), "cell ({i},{j})");
            }
            checked += 1;
        }
    }
    assert!(checked > 0);
}

#[test]
fn reduced_map_is_closed_outside_the_band() {
    let f = builtin_model("c3").unwrap();
    let grid = DirectionGrid::uniform(4).unwrap();
    let inside = scan::scan_reduced(&f, 0.0, &grid, RES).unwrap();
    assert!(inside.count(|l| l.is_open()) > 0);
    let outside = scan::scan_reduced(&f, 1.5, &grid, RES).unwrap();
    assert_eq!(outside.count(|l| *l == Label::AllClosed), grid.len());
}

#[test]
fn carpet_dimension() {
    let mut pts = vec![[0.0f64, 0.0f64]];
    let mut side = 1.0;
    for _ in 0..5 {
        side /= 3.0;
        pts = pts
            .iter()
            .flat_map(|p| (0..9).filter(|&k| k != 4).map(move |k| [p[0] + (k % 3) as f64 * side, p[1] + (k / 3) as f64 * side]))
            .collect();
    }
    let pts: Vec<[f64; 2]> = pts.iter().map(|p| [p[0] + side / 2.0, p[1] + side / 2.0]).collect();
    let scales: Vec<f64> = (1..=4).map(|k| 3f64.powi(-k)).collect();
    let d = scan::box_dimension(&pts, &scales).unwrap().dimension;
    assert!((d - 8f64.ln() / 3f64.ln()).abs() < 0.05, "{d}");
}
