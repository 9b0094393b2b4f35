//! Deviation sweeps over dilated domains and the regime verdict.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::Regime;
use crate::ergodic::{evaluate_summary, CylFunction};
use crate::error::{Error, Result};
use crate::finadd::capture_summaries;
use crate::geometry::{Domain, DomainKind, Point};
use crate::spectral::SpectralData;
use crate::system::SubstitutionSystem;
use crate::tiling::TilingView;

use super::stats::{exponent_fit, log_trend, Fit};

/// Probe layout of a sweep.
///
/// At every `R` the domain is evaluated at `probes` centres (the origin and
/// `probes - 1` points on the circle of radius `R / 4`) and at `subscales`
/// sizes `R lambda^{-t / subscales}`. With `anchored` set, it is also placed
/// around the vertices of the order-`k` supertiles at the origin
/// (`lambda^k >= R`), shifted by up to one tile unit, with a corner of its
/// bounding box on the anchor. An edge then runs along a long supertile
/// boundary, where boundary effects add coherently instead of cancelling.
/// The envelope columns are maxima over all placements.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub probes: usize,
    pub subscales: usize,
    pub anchored: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { probes: 5, subscales: 4, anchored: true }
    }
}

const ANCHOR_SHIFTS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

/// Smallest side of a prototile bounding box.
fn tile_unit(sys: &SubstitutionSystem) -> f64 {
    (0..sys.m())
        .map(|i| {
            let (lo, hi) = sys.support(i, 1.0, [0.0; 2]).bounding_box();
            (0..sys.dim).map(|a| hi[a] - lo[a]).fold(f64::INFINITY, f64::min)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Supertile order used for anchoring at scale `r`.
fn anchor_order(lambda: f64, r: f64) -> i32 {
    (r.ln() / lambda.ln()).ceil().max(0.0) as i32
}

/// Corners of the bounding box of `dom`.
fn box_corners(dom: &Domain) -> Vec<Point> {
    let (lo, hi) = dom.bounding_box();
    if dom.dim() == 1 {
        vec![[lo[0], 0.0], [hi[0], 0.0]]
    } else {
        vec![lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]]
    }
}

/// Anchor points at scale `r`: vertices of the order-`k` supertiles
/// meeting a unit cube at the origin, shifted on a grid of tile units.
pub fn anchor_points(view: &TilingView, r: f64) -> Result<Vec<Point>> {
    let sys = view.system();
    let k = anchor_order(sys.lambda, r);
    let unit = tile_unit(sys);
    let mut corners: Vec<Point> = Vec::new();
    for t in view.tiles_intersecting(&Domain::cube(sys.dim, unit), k)? {
        let (lo, hi) = t.support(sys).bounding_box();
        let xs = [lo[0], hi[0]];
        let ys = if sys.dim == 2 { vec![lo[1], hi[1]] } else { vec![0.0] };
        for &x in &xs {
            for &y in &ys {
                if !corners.iter().any(|c| (c[0] - x).abs() < 1e-9 && (c[1] - y).abs() < 1e-9) {
                    corners.push([x, y]);
                }
            }
        }
    }
    let shifts_y: &[f64] = if sys.dim == 2 { &ANCHOR_SHIFTS } else { &[0.0] };
    let mut out = Vec::new();
    for c in corners {
        for &a in &ANCHOR_SHIFTS {
            for &b in shifts_y {
                out.push([c[0] + a * unit, c[1] + b * unit]);
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub r: f64,
    /// Deviation on the centred domain `R Omega`.
    pub deviation: f64,
    pub residual: f64,
    pub phi2_abs: f64,
    pub deviation_envelope: f64,
    pub residual_envelope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationTable {
    pub system: String,
    pub f: Vec<f64>,
    pub domain: DomainKind,
    pub config: SweepConfig,
    pub rows: Vec<DeviationRow>,
}

/// `points` log-spaced values from `rmin` to `rmax`.
pub fn log_grid(rmin: f64, rmax: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![rmin],
        _ => {
            let (a, b) = (rmin.ln(), rmax.ln());
            (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect()
        }
    }
}

/// Probe centres for unit `R`.
pub fn probe_offsets(dim: usize, probes: usize) -> Vec<Point> {
    let mut out = vec![[0.0, 0.0]];
    for q in 1..probes {
        let a = 0.3 + std::f64::consts::TAU * (q - 1) as f64 / (probes - 1) as f64;
        out.push(if dim == 1 { [0.25 * a.cos(), 0.0] } else { [0.25 * a.cos(), 0.25 * a.sin()] });
    }
    out
}

/// A domain containing every placement used up to scale `rmax`.
pub fn sweep_extent(sys: &SubstitutionSystem, base: &Domain, rmax: f64, cfg: &SweepConfig) -> Domain {
    let mut side = rmax * (base.diameter() + if cfg.probes > 1 { 0.5 } else { 0.0 }) * 1.01;
    if cfg.anchored {
        // Order-k supertiles at the origin reach at most lambda^k times the
        // largest prototile extent, and lambda^k < lambda * rmax.
        let reach = (0..sys.m())
            .map(|i| {
                let (lo, hi) = sys.support(i, 1.0, [0.0; 2]).bounding_box();
                (0..sys.dim).map(|a| lo[a].abs().max(hi[a].abs())).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        let k = anchor_order(sys.lambda, rmax);
        let anchored = 2.0 * (sys.lambda.powi(k) * reach + 2.0 * tile_unit(sys) + rmax * base.diameter());
        side = side.max(anchored * 1.01);
    }
    Domain::cube(base.dim(), side).with_center(base.center())
}

pub fn deviation_curve(
    view: &TilingView,
    spec: &SpectralData,
    f: &CylFunction,
    base: &Domain,
    r_grid: &[f64],
    cfg: &SweepConfig,
) -> Result<DeviationTable> {
    if r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("R grid must be strictly increasing".into()));
    }
    let sys = view.system();
    let lam = sys.lambda;
    let offsets = probe_offsets(sys.dim, cfg.probes.max(1));
    let subscales = cfg.subscales.max(1);
    let rows = r_grid
        .par_iter()
        .map(|&r| -> Result<DeviationRow> {
            let anchors = if cfg.anchored { anchor_points(view, r)? } else { Vec::new() };
            let mut row = DeviationRow {
                r,
                deviation: 0.0,
                residual: 0.0,
                phi2_abs: 0.0,
                deviation_envelope: 0.0,
                residual_envelope: 0.0,
            };
            for (q, y) in offsets.iter().enumerate() {
                let doms: Vec<Domain> = (0..subscales)
                    .map(|t| {
                        let s = r * lam.powf(-(t as f64) / subscales as f64);
                        base.dilate(s).translated([y[0] * r, y[1] * r])
                    })
                    .collect();
                let sums = capture_summaries(view, &doms)?;
                for (t, (dom, s)) in doms.iter().zip(&sums).enumerate() {
                    let e = evaluate_summary(sys, spec, f, dom.volume(), s);
                    if q == 0 && t == 0 {
                        row.deviation = e.deviation;
                        row.residual = e.residual;
                        row.phi2_abs = e.phi2.norm();
                    }
                    row.deviation_envelope = row.deviation_envelope.max(e.deviation.abs());
                    row.residual_envelope = row.residual_envelope.max(e.residual);
                }
            }
            let scaled = base.dilate(r);
            let corners = box_corners(&scaled);
            let placed: Vec<Domain> = anchors
                .iter()
                .flat_map(|a| corners.iter().map(|c| scaled.translated([a[0] - c[0], a[1] - c[1]])))
                .collect();
            for doms in placed.chunks(64) {
                let sums = capture_summaries(view, doms)?;
                for (dom, s) in doms.iter().zip(&sums) {
                    let e = evaluate_summary(sys, spec, f, dom.volume(), s);
                    row.deviation_envelope = row.deviation_envelope.max(e.deviation.abs());
                    row.residual_envelope = row.residual_envelope.max(e.residual);
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DeviationTable {
        system: sys.name.clone(),
        f: f.c.clone(),
        domain: base.kind(),
        config: *cfg,
        rows,
    })
}

/// Regime predicted by the spectrum.
pub fn expected_regime(spec: &SpectralData) -> Regime {
    if spec.ell >= 2 {
        Regime::Power
    } else if spec.s >= 1 {
        Regime::LogCorrected
    } else if spec.dim == 1 {
        Regime::Bounded
    } else {
        Regime::Boundary
    }
}

/// Regime read off a measured slope and log trend.
///
/// A single logarithmic factor raises the fitted log-log slope by about
/// `1 / mean(ln R)`; only an excess over `d - 1` beyond 1.5 times that counts
/// as a power law.
pub fn verdict(slope: f64, trend: f64, dim: usize, mean_ln_r: f64) -> Regime {
    let base = dim as f64 - 1.0;
    if slope - base > (1.5 / mean_ln_r.max(1.0)).max(0.1) {
        Regime::Power
    } else if trend > 0.05 {
        Regime::LogCorrected
    } else if dim == 1 {
        Regime::Bounded
    } else {
        Regime::Boundary
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationSummary {
    /// Fit of the deviation envelope.
    pub slope_fit: Fit,
    /// Fit of the residual envelope.
    pub residual_fit: Option<Fit>,
    /// Fit of the centred deviation alone.
    pub raw_fit: Option<Fit>,
    /// Relative slope of `envelope / R^{d-1}` against `ln R`.
    pub log_trend: f64,
    pub alpha: Option<f64>,
    /// `max |Phi+_2(R Omega)| / R^alpha`.
    pub c1: Option<f64>,
    /// `max residual / (R^{d-1} (log R)^s)`.
    pub residual_constant: f64,
    pub verdict: Regime,
    pub expected: Regime,
}

pub fn summarize(table: &DeviationTable, spec: &SpectralData) -> Result<DeviationSummary> {
    let env: Vec<(f64, f64)> = table.rows.iter().map(|r| (r.r, r.deviation_envelope)).collect();
    let slope_fit = exponent_fit(&env)?;
    let res: Vec<(f64, f64)> = table.rows.iter().map(|r| (r.r, r.residual_envelope)).collect();
    let raw: Vec<(f64, f64)> = table.rows.iter().map(|r| (r.r, r.deviation)).collect();
    let d1 = spec.dim as f64 - 1.0;
    let log_trend = log_trend(&env, d1)?;
    let mean_ln_r = table.rows.iter().map(|r| r.r.ln()).sum::<f64>() / table.rows.len() as f64;
    let alpha = spec.alpha();
    let c1 = match alpha {
        Some(a) if spec.ell >= 2 => {
            Some(table.rows.iter().map(|r| r.phi2_abs / r.r.powf(a)).fold(0.0, f64::max))
        }
        _ => None,
    };
    let residual_constant = table
        .rows
        .iter()
        .map(|r| r.residual_envelope / (r.r.powf(d1) * r.r.ln().max(1.0).powi(spec.s as i32)))
        .fold(0.0, f64::max);
    Ok(DeviationSummary {
        slope_fit,
        residual_fit: exponent_fit(&res).ok(),
        raw_fit: exponent_fit(&raw).ok(),
        log_trend,
        alpha,
        c1,
        residual_constant,
        verdict: verdict(slope_fit.slope, log_trend, spec.dim, mean_ln_r),
        expected: expected_regime(spec),
    })
}
