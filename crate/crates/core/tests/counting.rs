mod common;

use std::collections::BTreeMap;

use supertile::ergodic::tile_count;
use supertile::system::matrix_power;
use supertile::tiling::{generate_patch, DEFAULT_PATCH_CAP};
use supertile::{Domain, Error, PlacedTile};

use common::{in_domain, leaves, view, SYSTEMS};

/// One supertile of every type at every order from the root down to 0.
fn representatives(root: PlacedTile, sys: &supertile::SubstitutionSystem) -> Vec<BTreeMap<usize, PlacedTile>> {
    let mut out = vec![BTreeMap::from([(root.kind, root)])];
    while out.last().unwrap().values().next().unwrap().order > 0 {
        let mut next = BTreeMap::new();
        for t in out.last().unwrap().values() {
            for c in t.children(sys) {
                next.entry(c.kind).or_insert(c);
            }
        }
        out.push(next);
    }
    out.reverse();
    out
}

#[test]
fn counts_inside_supertiles_match_matrix_powers() {
    for name in SYSTEMS {
        let mut v = view(name, 1);
        for depth in 2.. {
            if v.root().order >= 12 {
                break;
            }
            v = view(name, depth);
        }
        let sys = v.system();
        let s = sys.substitution_matrix();
        let reps = representatives(v.root(), sys);
        for k in 0..=6usize {
            let p = matrix_power(&s, k as u32);
            assert_eq!(reps[k].len(), sys.m(), "{name}: not every type occurs at order {k}");
            for (&j, t) in &reps[k] {
                let dom = Domain::from_support(&t.support(sys));
                for i in 0..sys.m() {
                    assert_eq!(tile_count(&v, i, &dom).unwrap(), p[i][j], "{name} k={k} i={i} j={j}");
                }
            }
        }
    }
}

#[test]
fn patches_have_matrix_column_counts() {
    for name in SYSTEMS {
        let sys = common::system(name);
        let s = sys.substitution_matrix();
        for k in 0..=5u32 {
            let p = matrix_power(&s, k);
            for j in 0..sys.m() {
                let patch = generate_patch(&sys, j, k, DEFAULT_PATCH_CAP).unwrap();
                let counts = patch.counts(sys.m());
                for i in 0..sys.m() {
                    assert_eq!(counts[i] as u128, p[i][j]);
                }
                let vol: f64 = patch.tiles.iter().map(|t| t.volume(&sys)).sum();
                let expect = PlacedTile::new(j, k as i32, [0.0; 2]).volume(&sys);
                assert!((vol - expect).abs() <= 1e-9 * expect);
            }
        }
    }
}

#[test]
fn patch_budget_is_enforced() {
    let sys = common::system("bicolor3x3");
    match generate_patch(&sys, 0, 6, 1000) {
        Err(Error::BudgetExceeded { count, cap }) => {
            assert_eq!(count, 9u128.pow(6));
            assert_eq!(cap, 1000);
        }
        other => panic!("expected BudgetExceeded, got {other:?}"),
    }
    assert_eq!(generate_patch(&sys, 1, 0, 1).unwrap().tiles.len(), 1);
}

#[test]
fn counts_in_cubes_match_brute_force() {
    for name in ["table2d", "chair", "bicolor3x3", "fibonacci"] {
        let v = view(name, 2);
        let sys = v.system();
        let tiles = leaves(&v);
        let dim = sys.dim;
        let mut checked = 0;
        for (side, c) in [(7.3, [0.4, -1.1]), (12.0, [2.0, 3.0]), (4.5, [-1.7, 0.25])] {
            let dom = Domain::cube(dim, side).with_center(if dim == 1 { [c[0], 0.0] } else { c });
            if !v.contains(&dom) {
                continue;
            }
            let mut brute = vec![0u128; sys.m()];
            for t in &tiles {
                let inside = t.support(sys).placed_pieces().iter().all(|p| {
                    p.vertices().iter().all(|&x| in_domain(&dom, [x[0], if dim == 1 { 0.0 } else { x[1] }]))
                });
                if inside {
                    brute[t.kind] += 1;
                }
            }
            for i in 0..sys.m() {
                assert_eq!(tile_count(&v, i, &dom).unwrap(), brute[i], "{name} side {side} type {i}");
            }
            checked += 1;
        }
        assert!(checked > 0, "{name}: no cube fits the view");
    }
}
