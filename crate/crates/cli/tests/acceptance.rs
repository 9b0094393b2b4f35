//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria whose failure is understood and documented are listed in
//! `KNOWN_FAILURES`; any other failure makes the target exit nonzero.

use std::collections::BTreeMap;
use std::fs;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use supertile::catalog::spectral;
use supertile::ergodic::tile_count;
use supertile::experiments::deviation::{summarize, sweep_extent, DeviationSummary};
use supertile::experiments::limitlaw::{limitlaw_study, LimitLawConfig};
use supertile::experiments::{deviation_curve, holder_scan, log_grid, random_pairs, SweepConfig};
use supertile::finadd::{cocycle_discrepancy, phi_plus_detailed, verify_cocycles};
use supertile::geometry::{classify, clip_volume};
use supertile::system::matrix_power;
use supertile::tiling::find_seed;
use supertile::{builtin, CylFunction, Domain, PlacedTile, SubstitutionSystem, TileClass, TilingView};

const SYSTEMS: [&str; 5] = ["fibonacci", "nonpisot13", "table2d", "chair", "bicolor3x3"];
const PLANAR: [&str; 3] = ["table2d", "chair", "bicolor3x3"];
const KNOWN_FAILURES: [u32; 1] = [7];

type Outcome = (bool, String);

fn system(name: &str) -> Arc<SubstitutionSystem> {
    Arc::new(builtin(name).expect("catalog").system)
}

fn view_of_order(name: &str, order: i32) -> TilingView {
    let sys = system(name);
    let seed = find_seed(&sys, 64).expect("seed");
    (1..).map(|k| TilingView::new(sys.clone(), seed, k).expect("view")).find(|v| v.root().order >= order).unwrap()
}

fn covering(name: &str, dom: &Domain) -> TilingView {
    let sys = system(name);
    let seed = find_seed(&sys, 64).expect("seed");
    TilingView::covering(sys, seed, dom).expect("covering view")
}

fn counting() -> Outcome {
    let mut checked = 0;
    for name in SYSTEMS {
        let v = view_of_order(name, 12);
        let sys = v.system();
        let s = sys.substitution_matrix();
        let mut level: BTreeMap<usize, PlacedTile> = BTreeMap::from([(v.root().kind, v.root())]);
        let mut by_order = BTreeMap::new();
        loop {
            let order = level.values().next().unwrap().order;
            by_order.insert(order, level.clone());
            if order == 0 {
                break;
            }
            let mut next = BTreeMap::new();
            for t in level.values() {
                for c in t.children(sys) {
                    next.entry(c.kind).or_insert(c);
                }
            }
            level = next;
        }
        for k in 0..=6 {
            let p = matrix_power(&s, k as u32);
            let reps = &by_order[&k];
            if reps.len() != sys.m() {
                return (false, format!("{name}: missing types at order {k}"));
            }
            for (&j, t) in reps {
                let dom = Domain::from_support(&t.support(sys));
                for i in 0..sys.m() {
                    let got = tile_count(&v, i, &dom).expect("count");
                    if got != p[i][j] {
                        return (false, format!("{name} k={k} ({i},{j}): {got} != {}", p[i][j]));
                    }
                    checked += 1;
                }
            }
        }
    }
    (true, format!("{checked} (system, k, i, j) cases exact"))
}

fn random_cube(rng: &mut ChaCha8Rng, rmin: f64, rmax: f64) -> Domain {
    let r = rng.random_range(rmin..rmax);
    Domain::cube(2, r).with_center([rng.random_range(-r..r), rng.random_range(-r..r)])
}

fn volume_identity() -> Outcome {
    let mut worst = 0.0f64;
    for name in PLANAR {
        let spec = spectral(&builtin(name).unwrap()).unwrap();
        let v = covering(name, &Domain::cube(2, 1000.0));
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for _ in 0..100 {
            let dom = random_cube(&mut rng, 5.0, 300.0);
            let p = phi_plus_detailed(&v, &spec, &spec.right[0], &dom).expect("phi+");
            let vol = dom.volume();
            worst = worst.max((p.value.re + p.frontier_volume - vol).abs() / vol);
        }
    }
    (worst < 1e-8, format!("max relative error {worst:.2e} over 300 cubes (tol 1e-8)"))
}

fn cocycles() -> Outcome {
    let mut aligned = 0.0f64;
    let mut ratio = 0.0f64;
    let mut coc1 = 0.0f64;
    let mut ok = true;
    for name in SYSTEMS {
        let spec = spectral(&builtin(name).unwrap()).unwrap();
        let v = view_of_order(name, 6);
        let sys = v.system();
        let lam = sys.lambda;
        for k in 1..=3 {
            for t in v.tiles_intersecting(&Domain::cube(sys.dim, 1.0), k + 1).expect("tiles") {
                let dom = Domain::from_support(&sys.support(
                    t.kind,
                    lam.powi(k),
                    [t.translation[0] / lam, t.translation[1] / lam],
                ));
                let y = [0.37, if sys.dim == 2 { -0.81 } else { 0.0 }];
                let dom = dom.translated([-y[0], -y[1]]);
                for n in 0..spec.ell {
                    let (c1, c3, _) = cocycle_discrepancy(&v, &spec, &spec.right[n], &dom, y).expect("cocycle");
                    aligned = aligned.max(c1).max(c3);
                }
            }
        }
        let side = if sys.dim == 1 { 60.0 } else { 20.0 };
        let cv = covering(name, &Domain::cube(sys.dim, 5.0 * lam * side));
        for n in 0..spec.ell {
            let rep = verify_cocycles(&cv, &spec, &spec.right[n], &Domain::cube(sys.dim, side), 200, 17 + n as u64)
                .expect("cocycles");
            ok &= rep.coc3_within_budget;
            ratio = ratio.max(rep.coc3_budget_ratio);
            coc1 = coc1.max(rep.coc1_max_rel);
        }
    }
    let pass = ok && aligned < 1e-9 && coc1 < 1e-9;
    (
        pass,
        format!("aligned max rel {aligned:.2e} (tol 1e-9); random coc1 {coc1:.2e}, coc3 budget ratio {ratio:.3} (<= 1)"),
    )
}

fn sweep(name: &str) -> (DeviationSummary, f64) {
    let t0 = Instant::now();
    let e = builtin(name).unwrap();
    let spec = spectral(&e).unwrap();
    let sys = Arc::new(e.system);
    let base = Domain::cube(sys.dim, 1.0);
    let cfg = SweepConfig::default();
    let (rmin, rmax) = e.default_range;
    let seed = find_seed(&sys, 64).unwrap();
    let view = TilingView::covering(sys.clone(), seed, &sweep_extent(&sys, &base, rmax, &cfg)).unwrap();
    let table = deviation_curve(&view, &spec, &e.default_f, &base, &log_grid(rmin, rmax, 16), &cfg).unwrap();
    (summarize(&table, &spec).unwrap(), t0.elapsed().as_secs_f64())
}

fn regimes(sweeps: &BTreeMap<&str, (DeviationSummary, f64)>) -> Outcome {
    let slope = |n: &str| sweeps[n].0.slope_fit.slope;
    let checks = [
        ("fibonacci", slope("fibonacci").abs() < 0.05, "|slope| < 0.05"),
        ("table2d", (0.9..=1.05).contains(&slope("table2d")), "slope in [0.9, 1.05]"),
        (
            "chair",
            (0.95..=1.15).contains(&slope("chair")) && sweeps["chair"].0.log_trend > 0.0,
            "slope in [0.95, 1.15], log trend > 0",
        ),
        ("nonpisot13", (slope("nonpisot13") - 0.317).abs() < 0.05, "0.317 +- 0.05"),
        ("bicolor3x3", (slope("bicolor3x3") - 1.465).abs() < 0.08, "1.465 +- 0.08"),
    ];
    let time_ok = sweeps.values().all(|(_, t)| *t < 300.0);
    let verdicts_ok = sweeps.values().all(|(s, _)| s.verdict == s.expected);
    let detail: Vec<String> = checks
        .iter()
        .map(|(n, ok, want)| {
            let (s, t) = &sweeps[n];
            format!("{n} {:.3} [{want}] {} {:?} {t:.1}s", s.slope_fit.slope, if *ok { "ok" } else { "off" }, s.verdict)
        })
        .collect();
    (checks.iter().all(|c| c.1) && time_ok && verdicts_ok, detail.join("; "))
}

fn asymptotics(sweeps: &BTreeMap<&str, (DeviationSummary, f64)>) -> Outcome {
    let s = &sweeps["bicolor3x3"].0;
    let res = s.residual_fit.as_ref().map_or(f64::INFINITY, |f| f.slope);
    let raw = s.slope_fit.slope;
    let ok = res <= 1.05 && (raw - 1.465).abs() < 0.08 && s.residual_constant.is_finite();
    (ok, format!("residual slope {res:.3} (<= 1.05), deviation slope {raw:.3}, C2 {:.3}", s.residual_constant))
}

fn holder() -> Outcome {
    let t0 = Instant::now();
    let e = builtin("bicolor3x3").unwrap();
    let spec = spectral(&e).unwrap();
    let sys = Arc::new(e.system);
    let exponent = spec.eigenvalues[1].norm().ln() / sys.lambda.ln() - 1.0;
    let rmax = 729.0;
    let seed = find_seed(&sys, 64).unwrap();
    let view = TilingView::covering(sys.clone(), seed, &Domain::cube(2, rmax * 1.01)).unwrap();
    let gap = sys.metrics().d_max;
    let v = &spec.right[1];
    let a = holder_scan(&view, &spec, v, &random_pairs(1000, 1.0, rmax, gap, 1), exponent).unwrap();
    let b = holder_scan(&view, &spec, v, &random_pairs(2000, 1.0, rmax, gap, 2), exponent).unwrap();
    let ratio = b.constant / a.constant;
    let secs = t0.elapsed().as_secs_f64();
    let ok = a.constant.is_finite() && ratio > 0.5 && ratio < 2.0 && secs < 120.0;
    (ok, format!("C3 {:.4} (10^3 pairs), {:.4} (2*10^3 pairs), ratio {ratio:.3}, exponent {exponent:.3}, {secs:.1}s", a.constant, b.constant))
}

fn limit_law() -> Outcome {
    let t0 = Instant::now();
    let e = builtin("bicolor3x3").unwrap();
    let spec = spectral(&e).unwrap();
    let f = CylFunction::new(vec![1.0, -1.0]);
    let grid: Vec<f64> = (1..=8).map(|i| i as f64 / 8.0).collect();
    let cfg = LimitLawConfig::new(2, 5, 10_000, grid.clone(), 1);
    let (_, s) = limitlaw_study(Arc::new(e.system), &spec, &f, &cfg).expect("study");
    let secs = t0.elapsed().as_secs_f64();
    let last = s.ns.len() - 1;
    let ks = s.ks_matrix[last - 1][last];
    let w1 = s.w1_matrix[last - 1][last];
    let ks_small_r = s.ks_consecutive_by_r[last - 1][..grid.len() - 1].iter().fold(0.0f64, |m, &x| m.max(x));
    let var_idx = [1, 3, 7];
    let var_ok = s.variance.iter().all(|row| var_idx.iter().all(|&i| row[i] > 1e-6));
    let gap_ok = s.sup_gap.windows(2).all(|w| w[1] < w[0]);
    let tight_ok = s.tightness.iter().all(|t| t.is_finite());
    let ks_ok = ks < 0.05;
    let parts = [
        format!("KS(4,5) at r=1 {ks:.4} (< 0.05) {}", if ks_ok { "ok" } else { "FAIL" }),
        format!("W1(4,5) at r=1 {w1:.4}, max KS(4,5) over r<1 {ks_small_r:.4}"),
        format!("variance at r=0.25,0.5,1 > 1e-6 {}", if var_ok { "ok" } else { "FAIL" }),
        format!(
            "sup gap {:?} decreasing {}",
            s.sup_gap.iter().map(|x| (x * 1e4).round() / 1e4).collect::<Vec<_>>(),
            if gap_ok { "ok" } else { "FAIL" }
        ),
        format!("tightness finite {}", if tight_ok { "ok" } else { "FAIL" }),
        format!("{secs:.1}s"),
    ];
    (ks_ok && var_ok && gap_ok && tight_ok && secs < 900.0, parts.join("; "))
}

fn geometry() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let systems: Vec<_> = SYSTEMS.iter().map(|n| system(n)).collect();
    let mut worst_z = 0.0f64;
    let mut class_ok = true;
    for pair in 0..100 {
        let sys = &systems[pair % systems.len()];
        let dim = sys.dim;
        let tile = sys.support(
            rng.random_range(0..sys.m()),
            rng.random_range(0.5..4.0),
            [rng.random_range(-3.0..3.0), if dim == 2 { rng.random_range(-3.0..3.0) } else { 0.0 }],
        );
        let size = rng.random_range(1.0..6.0);
        let ball = pair % 3 == 0;
        let dom = if ball { Domain::ball(dim, size / 2.0) } else { Domain::cube(dim, size) };
        let inside_dom = |p: [f64; 2]| {
            if ball {
                (0..dim).map(|a| p[a] * p[a]).sum::<f64>() <= size * size / 4.0
            } else {
                (0..dim).all(|a| p[a].abs() <= size / 2.0)
            }
        };
        let pieces = tile.placed_pieces();
        let (lo, hi) = tile.bounding_box();
        let area: f64 = (0..dim).map(|a| hi[a] - lo[a]).product();
        let n = 1_000_000;
        let (mut both, mut tile_only) = (0usize, 0usize);
        for _ in 0..n {
            let mut p = [0.0; 2];
            for a in 0..dim {
                p[a] = rng.random_range(lo[a]..hi[a]);
            }
            if pieces.iter().any(|q| q.depth(p) >= 0.0) {
                if inside_dom(p) {
                    both += 1;
                } else {
                    tile_only += 1;
                }
            }
        }
        let frac = both as f64 / n as f64;
        let sigma = (area * (frac * (1.0 - frac) / n as f64).sqrt()).max(area / n as f64);
        worst_z = worst_z.max((area * frac - clip_volume(&dom, &tile)).abs() / sigma);
        class_ok &= match classify(&dom, &tile) {
            TileClass::Inside => tile_only == 0,
            TileClass::Outside => both == 0,
            TileClass::Crossing => both > 0 || tile_only > 0,
        };
    }
    let secs = t0.elapsed().as_secs_f64();
    (
        worst_z <= 3.0 && class_ok && secs < 120.0,
        format!("max |clip - MC| / sigma {worst_z:.2} (<= 3) over 100 pairs, classify consistent {class_ok}, {secs:.1}s"),
    )
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_supertile");
    let mut outputs = Vec::new();
    for threads in [1, 4, 8] {
        for _ in 0..2 {
            let dir = tempfile::tempdir().expect("tempdir");
            let status = Command::new(bin)
                .args(["--system", "bicolor3x3", "--threads", &threads.to_string(), "--out"])
                .arg(dir.path())
                .args(["limitlaw", "--n-range", "2..3", "--samples", "400", "--r-grid", "4", "--seed", "9"])
                .args(["--window-factor", "40"])
                .output()
                .expect("run cli");
            if !status.status.success() {
                return (false, format!("exit {:?}: {}", status.status.code(), String::from_utf8_lossy(&status.stderr)));
            }
            let csv = fs::read(dir.path().join("limitlaw.csv")).expect("csv");
            let json = fs::read(dir.path().join("limitlaw_summary.json")).expect("json");
            outputs.push((threads, csv, json));
        }
    }
    let same = outputs.windows(2).all(|w| w[0].1 == w[1].1 && w[0].2 == w[1].2);
    (same, format!("{} runs at 1, 4, 8 threads byte-identical: {same}", outputs.len()))
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut record = |id, name, f: &dyn Fn() -> Outcome| {
        let t0 = Instant::now();
        let (ok, detail) = f();
        let line = format!(
            "{} criterion {id} ({name}): {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            t0.elapsed().as_secs_f64()
        );
        println!("{line}");
        results.push((id, name, (ok, detail)));
    };
    record(1, "counting identity", &counting);
    record(2, "volume identity", &volume_identity);
    record(3, "cocycles", &cocycles);
    let sweeps: BTreeMap<&str, (DeviationSummary, f64)> = SYSTEMS.iter().map(|&n| (n, sweep(n))).collect();
    record(4, "regime trichotomy", &|| regimes(&sweeps));
    record(5, "asymptotic formula", &|| asymptotics(&sweeps));
    record(6, "Hoelder modulus", &holder);
    record(7, "limit law", &limit_law);
    record(8, "geometry oracles", &geometry);
    record(9, "determinism", &determinism);

    let unexpected: Vec<u32> =
        results.iter().filter(|(id, _, (ok, _))| !ok && !KNOWN_FAILURES.contains(id)).map(|r| r.0).collect();
    let fails = results.iter().filter(|r| !r.2 .0).count();
    println!("acceptance: {} passed, {fails} failed, unexpected failures {unexpected:?}", results.len() - fails);
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
