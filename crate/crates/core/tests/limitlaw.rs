mod common;

use std::sync::Arc;

use supertile::catalog::spectral;
use supertile::experiments::limitlaw::{
    beta, check_hypotheses, limitlaw_study, preconditions, window, LimitLawConfig,
};
use supertile::experiments::stats::variance;
use supertile::experiments::{ks_distance, limitlaw_sample, renormalized_phi};
use supertile::tiling::find_seed;
use supertile::{builtin, CylFunction, Domain, Error, TilingView};

#[test]
fn hypotheses_per_catalog_system() {
    for (name, ok) in
        [("fibonacci", false), ("nonpisot13", false), ("table2d", false), ("chair", false), ("bicolor3x3", true)]
    {
        let spec = spectral(&builtin(name).unwrap()).unwrap();
        let res = check_hypotheses(&spec);
        assert_eq!(res.is_ok(), ok, "{name}: {res:?}");
        if !ok {
            assert!(matches!(res, Err(Error::HypothesesFail(_))));
        }
    }
}

#[test]
fn preconditions_on_the_test_function() {
    let spec = spectral(&builtin("bicolor3x3").unwrap()).unwrap();
    assert!(matches!(
        preconditions(&spec, &CylFunction::new(vec![1.0, 0.0])),
        Err(Error::MeanNonzero(_))
    ));
    assert!(matches!(preconditions(&spec, &CylFunction::new(vec![0.0, 0.0])), Err(Error::BetaZero)));
    let f = CylFunction::new(vec![1.0, -1.0]);
    let (theta2, b) = preconditions(&spec, &f).unwrap();
    assert!((theta2 - 5.0).abs() < 1e-9);
    assert!((b - beta(&spec, &f).unwrap()).abs() < 1e-15);
    assert!((b.abs() - 2f64.sqrt()).abs() < 1e-9, "beta = {b}");
}

#[test]
fn sampling_is_reproducible_and_matches_direct_evaluation() {
    let e = builtin("bicolor3x3").unwrap();
    let spec = spectral(&e).unwrap();
    let sys = Arc::new(e.system);
    let n = 2;
    let win = window(2, sys.lambda, n, 20.0);
    let seed = find_seed(&sys, 64).unwrap();
    let view = TilingView::covering(sys.clone(), seed, &Domain::cube(2, 25.0 * 9.0)).unwrap();
    let f = CylFunction::new(vec![1.0, -1.0]);
    let grid = [0.25, 0.5, 1.0];
    let a = limitlaw_sample(&view, &spec, &f, n, 200, &grid, 7, &win).unwrap();
    let b = limitlaw_sample(&view, &spec, &f, n, 200, &grid, 7, &win).unwrap();
    assert_eq!(a, b);
    let c = limitlaw_sample(&view, &spec, &f, n, 200, &grid, 8, &win).unwrap();
    assert_ne!(a.translations, c.translations);
    for id in [0, 17, 199] {
        let direct = renormalized_phi(&view, &spec, n, &grid, a.translations[id]).unwrap();
        assert_eq!(direct, a.renormalized[id]);
    }
    assert!(a.sup_gap() >= a.mean_gap());
}

#[test]
fn small_study_converges() {
    let e = builtin("bicolor3x3").unwrap();
    let spec = spectral(&e).unwrap();
    let f = CylFunction::new(vec![1.0, -1.0]);
    let cfg = LimitLawConfig::new(2, 4, 1500, vec![0.25, 0.5, 0.75, 1.0], 3);
    let (dists, s) = limitlaw_study(Arc::new(e.system), &spec, &f, &cfg).unwrap();
    assert_eq!(s.ns, vec![2, 3, 4]);
    assert!(s.window_frequency_error < 0.01, "{}", s.window_frequency_error);
    assert!(s.sup_gap.windows(2).all(|w| w[1] < w[0]), "{:?}", s.sup_gap);
    for row in &s.variance {
        assert!(row.iter().all(|&v| v > 1e-6), "{row:?}");
    }
    assert!(s.tightness.iter().all(|t| t.is_finite()));
    // Small r: consecutive laws are already close.
    let ks = ks_distance(&dists[1].column(0), &dists[2].column(0));
    assert!(ks < 0.06, "{ks}");
    let v = variance(&dists[2].column(3));
    assert!((0.2..0.6).contains(&v), "{v}");
}

#[test]
fn study_rejects_fibonacci() {
    let e = builtin("fibonacci").unwrap();
    let spec = spectral(&e).unwrap();
    let cfg = LimitLawConfig::new(2, 3, 100, vec![0.5, 1.0], 1);
    let res = limitlaw_study(Arc::new(e.system), &spec, &CylFunction::new(vec![1.0, -1.0]), &cfg);
    assert!(matches!(res, Err(Error::HypothesesFail(_))));
}
