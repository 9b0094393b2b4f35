mod common;

use num_complex::Complex64;
use proptest::prelude::*;

use supertile::catalog::spectral;
use supertile::ergodic::{ergodic_integral, tile_count};
use supertile::experiments::{ks_distance, log_grid};
use supertile::finadd::cocycle_discrepancy;
use supertile::geometry::{classify, clip_volume, ConvexPiece};
use supertile::{builtin, CylFunction, Domain, TileClass};

fn planar() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["table2d", "chair", "bicolor3x3"])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn clip_is_bounded_and_consistent_with_classify(
        name in planar(),
        kind in 0usize..4,
        scale in 0.3f64..5.0,
        ox in -4.0f64..4.0,
        oy in -4.0f64..4.0,
        side in 0.5f64..8.0,
        ball in any::<bool>(),
    ) {
        let sys = common::system(name);
        let tile = sys.support(kind % sys.m(), scale, [ox, oy]);
        let dom = if ball { Domain::ball(2, side / 2.0) } else { Domain::cube(2, side) };
        let v = clip_volume(&dom, &tile);
        let full = tile.volume();
        prop_assert!(v >= -1e-12 && v <= full * (1.0 + 1e-12));
        match classify(&dom, &tile) {
            TileClass::Inside => prop_assert!((v - full).abs() < 1e-9 * full),
            TileClass::Outside => prop_assert!(v < 1e-9 * full),
            TileClass::Crossing => prop_assert!(v > 0.0 && v < full),
        }
    }

    #[test]
    fn clip_is_additive_over_a_split_domain(
        name in planar(),
        scale in 0.3f64..3.0,
        ox in -3.0f64..3.0,
        oy in -3.0f64..3.0,
        cut in -2.0f64..2.0,
    ) {
        let sys = common::system(name);
        let tile = sys.support(0, scale, [ox, oy]);
        let rect = |x0: f64, x1: f64| ConvexPiece::polygon(vec![[x0, -3.0], [x1, -3.0], [x1, 3.0], [x0, 3.0]]).unwrap();
        let whole = Domain::polytope(vec![rect(-3.0, 3.0)]).unwrap();
        let left = Domain::polytope(vec![rect(-3.0, cut)]).unwrap();
        let right = Domain::polytope(vec![rect(cut, 3.0)]).unwrap();
        let parts = clip_volume(&left, &tile) + clip_volume(&right, &tile);
        prop_assert!((clip_volume(&whole, &tile) - parts).abs() < 1e-9 * tile.volume().max(1.0));
    }

    #[test]
    fn integrals_are_linear_and_count_volume(
        name in planar(),
        side in 1.0f64..30.0,
        cx in -5.0f64..5.0,
        cy in -5.0f64..5.0,
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
    ) {
        let dom = Domain::cube(2, side).with_center([cx, cy]);
        let view = common::covering(name, &Domain::cube(2, 80.0));
        let m = view.system().m();
        let one = ergodic_integral(&view, &CylFunction::constant(m, 1.0), &dom).unwrap();
        prop_assert!((one - dom.volume()).abs() < 1e-9 * dom.volume());
        let f = CylFunction::indicator(m, 0);
        let g = CylFunction::indicator(m, m - 1);
        let lhs = ergodic_integral(&view, &f.scaled_sum(a, &g, b), &dom).unwrap();
        let rhs = a * ergodic_integral(&view, &f, &dom).unwrap() + b * ergodic_integral(&view, &g, &dom).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9 * dom.volume());
    }

    #[test]
    fn tile_counts_grow_with_the_domain(name in planar(), side in 1.0f64..20.0, grow in 0.0f64..10.0) {
        let view = common::covering(name, &Domain::cube(2, 80.0));
        let small = Domain::cube(2, side);
        let large = Domain::cube(2, side + grow);
        for i in 0..view.system().m() {
            prop_assert!(tile_count(&view, i, &small).unwrap() <= tile_count(&view, i, &large).unwrap());
        }
    }

    #[test]
    fn translation_cocycle_is_exact(side in 2.0f64..20.0, yx in -10.0f64..10.0, yy in -10.0f64..10.0) {
        let e = builtin("bicolor3x3").unwrap();
        let spec = spectral(&e).unwrap();
        let view = common::covering("bicolor3x3", &Domain::cube(2, 200.0));
        let (c1, _, ratio) = cocycle_discrepancy(&view, &spec, &spec.right[1], &Domain::cube(2, side), [yx, yy]).unwrap();
        prop_assert!(c1 < 1e-9);
        prop_assert!(ratio <= 1.0 + 1e-9);
    }

    #[test]
    fn powers_compose(name in prop::sample::select(common::SYSTEMS.to_vec()), a in 0i64..6, b in 0i64..6, seed in any::<u64>()) {
        let spec = spectral(&builtin(name).unwrap()).unwrap();
        let v: Vec<Complex64> = (0..spec.m())
            .map(|i| Complex64::new(((seed >> (8 * i)) & 0xff) as f64 / 255.0 - 0.5, 0.0))
            .collect();
        let two = spec.apply_power(&spec.apply_power(&v, a).unwrap(), b).unwrap();
        let one = spec.apply_power(&v, a + b).unwrap();
        let scale = one.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for (x, y) in one.iter().zip(&two) {
            prop_assert!((x - y).norm() < 1e-9 * scale);
        }
    }

    #[test]
    fn log_grids_are_increasing(rmin in 1.0f64..100.0, factor in 1.5f64..1000.0, points in 2usize..40) {
        let g = log_grid(rmin, rmin * factor, points);
        prop_assert_eq!(g.len(), points);
        prop_assert!(g.windows(2).all(|w| w[1] > w[0]));
        prop_assert!((g[0] - rmin).abs() < 1e-9 * rmin);
        prop_assert!((g[points - 1] - rmin * factor).abs() < 1e-9 * rmin * factor);
    }

    #[test]
    fn ks_is_a_metric_on_samples(
        a in prop::collection::vec(-10.0f64..10.0, 1..60),
        b in prop::collection::vec(-10.0f64..10.0, 1..60),
    ) {
        let ab = ks_distance(&a, &b);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(ab, ks_distance(&b, &a));
        prop_assert_eq!(ks_distance(&a, &a), 0.0);
    }
}
