//! Numerical experiments: deviation exponents, Hölder moduli and limit laws.

pub mod deviation;
pub mod limitlaw;
pub mod stats;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::finadd::{capture_summaries, phi_plus_from_summary};
use crate::geometry::Domain;
use crate::spectral::SpectralData;
use crate::tiling::TilingView;

pub use deviation::{deviation_curve, log_grid, summarize, DeviationRow, DeviationTable, SweepConfig};
pub use limitlaw::{limitlaw_sample, renormalized_phi, EmpiricalDistribution};
pub use stats::{exponent_fit, ks_distance, tightness_check, Fit};

/// Empirical Hölder constant of `r -> Phi+_v(Q_r)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderScan {
    pub pairs: usize,
    pub exponent: f64,
    /// `max |Phi+(Q_{r2}) - Phi+(Q_{r1})| / (r2^{d-1} (r2 - r1)^exponent)`.
    pub constant: f64,
}

/// Random pairs `r1 < r2` in `[rmin, rmax]` with `r2 - r1 >= min_gap`.
pub fn random_pairs(count: usize, rmin: f64, rmax: f64, min_gap: f64, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a = rng.random_range(rmin..rmax);
        let b = rng.random_range(rmin..rmax);
        let (r1, r2) = if a < b { (a, b) } else { (b, a) };
        if r2 - r1 >= min_gap {
            out.push((r1, r2));
        }
    }
    out
}

/// Hölder scan of `Phi+_v` on centred cubes.
pub fn holder_scan(
    view: &TilingView,
    spec: &SpectralData,
    v: &[Complex64],
    pairs: &[(f64, f64)],
    exponent: f64,
) -> Result<HolderScan> {
    let dim = view.system().dim;
    let mut radii: Vec<f64> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let mut values = Vec::with_capacity(radii.len());
    for chunk in radii.chunks(64) {
        let doms: Vec<Domain> = chunk.iter().map(|&r| Domain::cube(dim, r)).collect();
        for s in capture_summaries(view, &doms)? {
            values.push(phi_plus_from_summary(spec, v, &s).value);
        }
    }
    let lookup = |r: f64| values[radii.binary_search_by(|x| x.total_cmp(&r)).expect("present")];
    let mut constant = 0.0f64;
    for &(r1, r2) in pairs {
        let diff = (lookup(r2) - lookup(r1)).norm();
        constant = constant.max(diff / (r2.powi(dim as i32 - 1) * (r2 - r1).powf(exponent)));
    }
    Ok(HolderScan { pairs: pairs.len(), exponent, constant })
}
