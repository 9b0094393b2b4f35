//! Regression, empirical distribution distances and modulus estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares line through `(log R, log |value|)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub used: usize,
    /// Rows dropped for zero or non-finite values.
    pub dropped: usize,
}

/// Plain least squares of `y` on `x`: `(slope, intercept, r^2)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r2 = if sxx > 0.0 && syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, my - slope * mx, r2)
}

/// Log-log slope of `|value|` against `R`.
pub fn exponent_fit(rows: &[(f64, f64)]) -> Result<Fit> {
    let usable: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(r, v)| *r > 0.0 && v.abs() > 0.0 && v.is_finite() && r.is_finite())
        .map(|(r, v)| (r.ln(), v.abs().ln()))
        .collect();
    if usable.len() < 5 {
        return Err(Error::DegenerateFit { usable: usable.len() });
    }
    let (x, y): (Vec<f64>, Vec<f64>) = usable.iter().copied().unzip();
    let (slope, intercept, r2) = linear_fit(&x, &y);
    Ok(Fit { slope, intercept, r2, used: usable.len(), dropped: rows.len() - usable.len() })
}

/// Slope of `|value| / R^p` against `ln R`, divided by the mean of
/// `|value| / R^p`. Positive when the values outgrow the pure power `R^p`
/// by a logarithmic factor.
pub fn log_trend(rows: &[(f64, f64)], p: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(r, v)| *r > 0.0 && v.is_finite())
        .map(|(r, v)| (r.ln(), v.abs() / r.powf(p)))
        .collect();
    if pts.len() < 5 {
        return Err(Error::DegenerateFit { usable: pts.len() });
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let (slope, _, _) = linear_fit(&x, &y);
    Ok(if mean > 0.0 { slope / mean } else { 0.0 })
}

/// Two-sample Kolmogorov–Smirnov statistic `sup_x |F_a(x) - F_b(x)|`.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.len() == b.len() { 0.0 } else { 1.0 };
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Wasserstein-1 distance `int |F_a(x) - F_b(x)| dx` between empirical laws.
pub fn wasserstein1(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut last = a[0].min(b[0]);
    let mut acc = 0.0;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => break,
        };
        acc += (i as f64 / na - j as f64 / nb).abs() * (x - last);
        last = x;
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
    }
    acc
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)
}

/// `max |x(r2) - x(r1)| / |r2 - r1|^exponent` over the rows of `samples`
/// and the index pairs given.
pub fn tightness_check(
    samples: &[Vec<f64>],
    r_grid: &[f64],
    pairs: &[(usize, usize)],
    exponent: f64,
) -> f64 {
    let mut worst = 0.0f64;
    for row in samples {
        for &(a, b) in pairs {
            let gap = (r_grid[b] - r_grid[a]).abs();
            if gap > 0.0 {
                worst = worst.max((row[b] - row[a]).abs() / gap.powf(exponent));
            }
        }
    }
    worst
}

/// All pairs `(i, j)` with `i < j`.
pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}
