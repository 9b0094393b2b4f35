//! Sampling of normalized ergodic integrals over cubes `Q_{r lambda^n} + y`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use std::sync::Arc;

use crate::ergodic::{evaluate_summary, mean, tile_count, CylFunction};
use crate::error::{Error, Result};
use crate::finadd::{capture_summaries, m_phi_minus, phi_plus_from_summary};
use crate::geometry::{Domain, Point};
use crate::spectral::SpectralData;
use crate::system::SubstitutionSystem;
use crate::tiling::{find_seed, TilingView};

use super::stats::{all_pairs, ks_distance, tightness_check, variance, wasserstein1};

/// `theta_2` must be real, positive, simple, above `lambda^{d-1}` and
/// strictly dominate `|theta_3|`.
pub fn check_hypotheses(spec: &SpectralData) -> Result<f64> {
    let thr = spec.lambda.powi(spec.dim as i32 - 1);
    let Some(t2) = spec.eigenvalues.get(1) else {
        return Err(Error::HypothesesFail("no second eigenvalue".into()));
    };
    if t2.im != 0.0 || t2.re <= 0.0 {
        return Err(Error::HypothesesFail(format!("theta_2 = {t2} is not real positive")));
    }
    if spec.ell < 2 || t2.re <= thr {
        return Err(Error::HypothesesFail(format!(
            "theta_2 = {} does not exceed lambda^(d-1) = {thr}",
            t2.re
        )));
    }
    if spec.blocks.iter().any(|b| b.start == 1 && b.size > 1) {
        return Err(Error::HypothesesFail("theta_2 has a Jordan block".into()));
    }
    if let Some(t3) = spec.eigenvalues.get(2) {
        if t3.norm() >= t2.re * (1.0 - 1e-9) {
            return Err(Error::HypothesesFail(format!("|theta_3| = {} is not below theta_2", t3.norm())));
        }
    }
    Ok(t2.re)
}

/// `beta(f) = m_{Phi-_{u^(2)}}(f)`.
pub fn beta(spec: &SpectralData, f: &CylFunction) -> Result<f64> {
    let b = m_phi_minus(spec, &spec.dual[1], f);
    assert!(b.im.abs() <= 1e-10 * b.norm().max(1.0), "beta has imaginary part {}", b.im);
    if b.re.abs() <= 1e-12 * f.sup_norm().max(1e-300) {
        return Err(Error::BetaZero);
    }
    Ok(b.re)
}

/// Full precondition check: hypotheses, zero mean, nonzero `beta`.
pub fn preconditions(spec: &SpectralData, f: &CylFunction) -> Result<(f64, f64)> {
    let theta2 = check_hypotheses(spec)?;
    let mu = mean(spec, f);
    if mu.abs() > 1e-10 * f.sup_norm().max(1.0) {
        return Err(Error::MeanNonzero(mu));
    }
    Ok((theta2, beta(spec, f)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    pub n: u32,
    pub r_grid: Vec<f64>,
    /// `samples[s][r] = S_n[f, T - y_s](r) / (beta theta_2^n)`.
    pub samples: Vec<Vec<f64>>,
    /// `theta_2^{-n} Phi+_2(Q_{r lambda^n} + y_s)` for the same draws.
    pub renormalized: Vec<Vec<f64>>,
    pub translations: Vec<Point>,
    pub beta: f64,
    pub theta2: f64,
}

impl EmpiricalDistribution {
    pub fn column(&self, r: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s[r]).collect()
    }

    pub fn renormalized_column(&self, r: usize) -> Vec<f64> {
        self.renormalized.iter().map(|s| s[r]).collect()
    }

    /// `max_s max_r |sample - renormalized|`.
    pub fn sup_gap(&self) -> f64 {
        self.samples
            .iter()
            .zip(&self.renormalized)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    /// Mean over samples of `max_r |sample - renormalized|`.
    pub fn mean_gap(&self) -> f64 {
        let total: f64 = self
            .samples
            .iter()
            .zip(&self.renormalized)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
            .sum();
        total / self.samples.len().max(1) as f64
    }
}

/// Sampling window: the cube of side `window_factor * lambda^{n_max}`
/// centred at the origin.
pub fn window(dim: usize, lambda: f64, n_max: u32, window_factor: f64) -> Domain {
    Domain::cube(dim, window_factor * lambda.powi(n_max as i32))
}

/// A domain containing every cube `Q_{lambda^{n_max}} + y`, `y` in the window.
pub fn sampling_extent(dim: usize, lambda: f64, n_max: u32, window_factor: f64) -> Domain {
    Domain::cube(dim, (window_factor + 1.0) * lambda.powi(n_max as i32) * 1.001)
}

/// Largest relative error between tile frequencies inside `win` and `u^(1)`.
pub fn window_frequency_error(view: &TilingView, spec: &SpectralData, win: &Domain) -> Result<f64> {
    let freq = spec.frequencies();
    let vol = win.volume();
    let mut worst = 0.0f64;
    for (i, fr) in freq.iter().enumerate() {
        let count = tile_count(view, i, win)? as f64;
        worst = worst.max((count / vol - fr).abs() / fr);
    }
    Ok(worst)
}

/// Uniform draw from the window for sample `id`, independent of thread layout.
pub fn draw_translation(seed: u64, id: u64, win: &Domain) -> Point {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    let (lo, hi) = win.bounding_box();
    let x = rng.random_range(lo[0]..hi[0]);
    let y = if win.dim() == 2 { rng.random_range(lo[1]..hi[1]) } else { 0.0 };
    [x, y]
}

/// Draws `samples` translations from `win` and evaluates the normalized
/// integrals and the renormalized `Phi+_2` on `Q_{r lambda^n} + y`.
#[allow(clippy::too_many_arguments)]
pub fn limitlaw_sample(
    view: &TilingView,
    spec: &SpectralData,
    f: &CylFunction,
    n: u32,
    samples: usize,
    r_grid: &[f64],
    seed: u64,
    win: &Domain,
) -> Result<EmpiricalDistribution> {
    let (theta2, beta) = preconditions(spec, f)?;
    if r_grid.iter().any(|r| !(0.0..=1.0).contains(r)) || r_grid.len() > 64 {
        return Err(Error::InvalidArgument("r grid must hold at most 64 values in [0, 1]".into()));
    }
    let sys = view.system();
    let scale = sys.lambda.powi(n as i32);
    let norm_s = beta * theta2.powi(n as i32);
    let norm_phi = theta2.powi(n as i32);
    let positive: Vec<usize> = (0..r_grid.len()).filter(|&i| r_grid[i] > 0.0).collect();
    let rows = (0..samples as u64)
        .into_par_iter()
        .map(|id| -> Result<(Point, Vec<f64>, Vec<f64>)> {
            let y = draw_translation(seed, id, win);
            let doms: Vec<Domain> = positive
                .iter()
                .map(|&i| Domain::cube(sys.dim, r_grid[i] * scale).translated(y))
                .collect();
            let sums = capture_summaries(view, &doms)?;
            let mut s_row = vec![0.0; r_grid.len()];
            let mut p_row = vec![0.0; r_grid.len()];
            for ((&i, dom), s) in positive.iter().zip(&doms).zip(&sums) {
                let e = evaluate_summary(sys, spec, f, dom.volume(), s);
                s_row[i] = e.integral / norm_s;
                p_row[i] = phi_plus_from_summary(spec, &spec.right[1], s).value.re / norm_phi;
            }
            Ok((y, s_row, p_row))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = EmpiricalDistribution {
        n,
        r_grid: r_grid.to_vec(),
        samples: Vec::with_capacity(samples),
        renormalized: Vec::with_capacity(samples),
        translations: Vec::with_capacity(samples),
        beta,
        theta2,
    };
    for (y, s, p) in rows {
        out.translations.push(y);
        out.samples.push(s);
        out.renormalized.push(p);
    }
    Ok(out)
}

/// `theta_2^{-n} Phi+_2(Q_{r lambda^n} + y)` for each `r`.
pub fn renormalized_phi(
    view: &TilingView,
    spec: &SpectralData,
    n: u32,
    r_grid: &[f64],
    y: Point,
) -> Result<Vec<f64>> {
    let theta2 = check_hypotheses(spec)?;
    let sys = view.system();
    let scale = sys.lambda.powi(n as i32);
    let mut out = vec![0.0; r_grid.len()];
    let idx: Vec<usize> = (0..r_grid.len()).filter(|&i| r_grid[i] > 0.0).collect();
    let doms: Vec<Domain> =
        idx.iter().map(|&i| Domain::cube(sys.dim, r_grid[i] * scale).translated(y)).collect();
    for chunk in idx.chunks(64).zip(doms.chunks(64)) {
        let sums = capture_summaries(view, chunk.1)?;
        for (&i, s) in chunk.0.iter().zip(&sums) {
            out[i] = phi_plus_from_summary(spec, &spec.right[1], s).value.re / theta2.powi(n as i32);
        }
    }
    Ok(out)
}

/// Default side of the sampling window in units of `lambda^{n_max}`.
pub const DEFAULT_WINDOW_FACTOR: f64 = 200.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitLawConfig {
    pub n_min: u32,
    pub n_max: u32,
    pub samples: usize,
    pub r_grid: Vec<f64>,
    pub seed: u64,
    pub window_factor: f64,
}

impl LimitLawConfig {
    pub fn new(n_min: u32, n_max: u32, samples: usize, r_grid: Vec<f64>, seed: u64) -> Self {
        LimitLawConfig { n_min, n_max, samples, r_grid, seed, window_factor: DEFAULT_WINDOW_FACTOR }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitLawSummary {
    pub ns: Vec<u32>,
    pub beta: f64,
    pub theta2: f64,
    /// Relative error of tile frequencies in the sampling window.
    pub window_frequency_error: f64,
    /// `ks[a][b]` between scales `ns[a]` and `ns[b]` at the largest `r`.
    pub ks_matrix: Vec<Vec<f64>>,
    /// Same pairs, Wasserstein-1 distance at the largest `r`.
    pub w1_matrix: Vec<Vec<f64>>,
    /// `ks_consecutive_by_r[i][r]`: KS between `ns[i]` and `ns[i + 1]` at each `r`.
    pub ks_consecutive_by_r: Vec<Vec<f64>>,
    /// `variance[i][r]` of the normalized values at scale `ns[i]`.
    pub variance: Vec<Vec<f64>>,
    pub sup_gap: Vec<f64>,
    pub mean_gap: Vec<f64>,
    /// Exponent `alpha - (d - 1)` used by the tightness modulus.
    pub tightness_exponent: f64,
    pub tightness: Vec<f64>,
}

/// Samples every scale in `cfg` and summarizes convergence.
pub fn limitlaw_study(
    sys: Arc<SubstitutionSystem>,
    spec: &SpectralData,
    f: &CylFunction,
    cfg: &LimitLawConfig,
) -> Result<(Vec<EmpiricalDistribution>, LimitLawSummary)> {
    let (theta2, beta) = preconditions(spec, f)?;
    if cfg.n_min > cfg.n_max || cfg.samples < 2 || cfg.r_grid.len() < 2 {
        return Err(Error::InvalidArgument(
            "need n_min <= n_max, at least 2 samples and 2 grid points".into(),
        ));
    }
    if cfg.r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("r grid must be strictly increasing".into()));
    }
    let seed = find_seed(&sys, 64)?;
    let (dim, lambda) = (sys.dim, sys.lambda);
    let win = window(dim, lambda, cfg.n_max, cfg.window_factor);
    let view = TilingView::covering(sys.clone(), seed, &sampling_extent(dim, lambda, cfg.n_max, cfg.window_factor))?;
    let freq_err = window_frequency_error(&view, spec, &win)?;
    let ns: Vec<u32> = (cfg.n_min..=cfg.n_max).collect();
    let dists = ns
        .iter()
        .map(|&n| limitlaw_sample(&view, spec, f, n, cfg.samples, &cfg.r_grid, cfg.seed, &win))
        .collect::<Result<Vec<_>>>()?;

    let last = cfg.r_grid.len() - 1;
    let pairwise = |metric: fn(&[f64], &[f64]) -> f64| -> Vec<Vec<f64>> {
        dists
            .iter()
            .map(|a| dists.iter().map(|b| metric(&a.column(last), &b.column(last))).collect())
            .collect()
    };
    let ks_consecutive_by_r = dists
        .windows(2)
        .map(|w| (0..=last).map(|r| ks_distance(&w[0].column(r), &w[1].column(r))).collect())
        .collect();
    let exponent = spec.alpha().unwrap_or(dim as f64) - (dim as f64 - 1.0);
    let d_max = sys.metrics().d_max;
    let tightness = dists
        .iter()
        .map(|d| {
            let gap = d_max / lambda.powi(d.n as i32);
            let pairs: Vec<(usize, usize)> = all_pairs(cfg.r_grid.len())
                .into_iter()
                .filter(|&(a, b)| cfg.r_grid[b] - cfg.r_grid[a] >= gap)
                .collect();
            tightness_check(&d.samples, &cfg.r_grid, &pairs, exponent)
        })
        .collect();
    let summary = LimitLawSummary {
        ns: ns.clone(),
        beta,
        theta2,
        window_frequency_error: freq_err,
        ks_matrix: pairwise(ks_distance),
        w1_matrix: pairwise(wasserstein1),
        ks_consecutive_by_r,
        variance: dists.iter().map(|d| (0..=last).map(|r| variance(&d.column(r))).collect()).collect(),
        sup_gap: dists.iter().map(EmpiricalDistribution::sup_gap).collect(),
        mean_gap: dists.iter().map(EmpiricalDistribution::mean_gap).collect(),
        tightness_exponent: exponent,
        tightness,
    };
    Ok((dists, summary))
}
