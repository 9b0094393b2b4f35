mod common;

use std::sync::Arc;

use supertile::catalog::{spectral, Regime};
use supertile::experiments::deviation::{summarize, sweep_extent, DeviationSummary};
use supertile::experiments::{deviation_curve, holder_scan, log_grid, random_pairs, DeviationTable, SweepConfig};
use supertile::tiling::find_seed;
use supertile::{builtin, Domain, Error, TilingView};

fn sweep(name: &str, points: usize) -> (DeviationTable, DeviationSummary) {
    let e = builtin(name).unwrap();
    let spec = spectral(&e).unwrap();
    let sys = Arc::new(e.system);
    let base = Domain::cube(sys.dim, 1.0);
    let cfg = SweepConfig::default();
    let (rmin, rmax) = e.default_range;
    let seed = find_seed(&sys, 64).unwrap();
    let view = TilingView::covering(sys.clone(), seed, &sweep_extent(&sys, &base, rmax, &cfg)).unwrap();
    let table = deviation_curve(&view, &spec, &e.default_f, &base, &log_grid(rmin, rmax, points), &cfg).unwrap();
    let summary = summarize(&table, &spec).unwrap();
    (table, summary)
}

#[test]
fn fibonacci_deviations_are_bounded() {
    let (table, s) = sweep("fibonacci", 12);
    assert!(s.slope_fit.slope.abs() < 0.05, "{s:?}");
    assert_eq!(s.verdict, Regime::Bounded);
    assert!(table.rows.iter().all(|r| r.deviation_envelope < 2.0));
}

#[test]
fn nonpisot_deviation_grows_with_alpha() {
    let (_, s) = sweep("nonpisot13", 12);
    assert!((s.slope_fit.slope - 0.317).abs() < 0.05, "{s:?}");
    assert_eq!(s.verdict, Regime::Power);
}

#[test]
fn table_deviation_is_boundary_sized() {
    let (_, s) = sweep("table2d", 10);
    assert!((0.9..=1.05).contains(&s.slope_fit.slope), "{s:?}");
    assert_eq!(s.verdict, Regime::Boundary);
}

#[test]
fn bicolor_expansion_removes_the_power_term() {
    let (table, s) = sweep("bicolor3x3", 10);
    assert!((s.slope_fit.slope - 1.465).abs() < 0.08, "{s:?}");
    assert_eq!(s.verdict, Regime::Power);
    let res = s.residual_fit.expect("residual fit");
    assert!(res.slope <= 1.05, "{res:?}");
    // The residual stays below a fixed multiple of the boundary size.
    let worst = table.rows.iter().map(|r| r.residual_envelope / r.r).fold(0.0, f64::max);
    assert!(worst < 10.0, "{worst}");
    let raw = s.raw_fit.expect("raw fit");
    assert!(raw.slope > res.slope + 0.3, "{raw:?} {res:?}");
}

#[test]
fn single_point_grid_cannot_be_fitted() {
    let e = builtin("fibonacci").unwrap();
    let spec = spectral(&e).unwrap();
    let sys = Arc::new(e.system);
    let seed = find_seed(&sys, 64).unwrap();
    let view = TilingView::new(sys.clone(), seed, 4).unwrap();
    let base = Domain::cube(1, 1.0);
    let table = deviation_curve(&view, &spec, &e.default_f, &base, &[20.0], &SweepConfig::default()).unwrap();
    assert!(matches!(summarize(&table, &spec), Err(Error::DegenerateFit { .. })));
}

#[test]
fn holder_constant_is_stable_under_more_pairs() {
    let e = builtin("bicolor3x3").unwrap();
    let spec = spectral(&e).unwrap();
    let sys = Arc::new(e.system);
    let lam = sys.lambda;
    let exponent = spec.eigenvalues[1].norm().ln() / lam.ln() - 1.0;
    let rmax = 243.0;
    let seed = find_seed(&sys, 64).unwrap();
    let view = TilingView::covering(sys.clone(), seed, &Domain::cube(2, rmax * 1.01)).unwrap();
    let gap = sys.metrics().d_max;
    let v = &spec.right[1];
    let small = holder_scan(&view, &spec, v, &random_pairs(500, 1.0, rmax, gap, 1), exponent).unwrap();
    let large = holder_scan(&view, &spec, v, &random_pairs(1000, 1.0, rmax, gap, 2), exponent).unwrap();
    assert!(small.constant.is_finite() && small.constant > 0.0);
    let ratio = large.constant / small.constant;
    assert!((0.5..2.0).contains(&ratio), "{small:?} {large:?}");
}
