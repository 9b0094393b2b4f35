//! Cylindrical functions, ergodic integrals over domains, deviations and the
//! residual of the asymptotic expansion.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finadd::{capture_summary, m_phi_minus, CaptureSummary};
use crate::geometry::{clip_volume, Domain};
use crate::spectral::SpectralData;
use crate::system::{matrix_power, SubstitutionSystem};
use crate::tiling::TilingView;

type C = Complex64;

/// A cylindrical function with constant density `c[i]` on tiles of type `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylFunction {
    pub c: Vec<f64>,
}

impl CylFunction {
    pub fn new(c: Vec<f64>) -> Self {
        CylFunction { c }
    }

    pub fn constant(m: usize, value: f64) -> Self {
        CylFunction { c: vec![value; m] }
    }

    pub fn indicator(m: usize, i: usize) -> Self {
        let mut c = vec![0.0; m];
        c[i] = 1.0;
        CylFunction { c }
    }

    fn check(&self, m: usize) -> Result<()> {
        if self.c.len() != m {
            return Err(Error::InvalidArgument(format!(
                "density vector has {} entries, system has {m} prototiles",
                self.c.len()
            )));
        }
        Ok(())
    }

    /// `w_i = c_i vol(A_i)`, the mass of `f` on one tile of type `i`.
    pub fn weights(&self, sys: &SubstitutionSystem) -> Vec<f64> {
        self.c.iter().zip(sys.volumes()).map(|(c, v)| c * v).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.c.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `sum_i u^(1)_i |c_i| vol(A_i)`.
    pub fn l1_norm(&self, spec: &SpectralData) -> f64 {
        let freq = spec.frequencies();
        self.c.iter().enumerate().map(|(i, c)| freq[i] * c.abs() * spec.right[0][i].re).sum()
    }

    pub fn scaled_sum(&self, a: f64, other: &CylFunction, b: f64) -> CylFunction {
        CylFunction { c: self.c.iter().zip(&other.c).map(|(x, y)| a * x + b * y).collect() }
    }
}

/// `int f dmu = sum_i u^(1)_i c_i vol(A_i)`.
pub fn mean(spec: &SpectralData, f: &CylFunction) -> f64 {
    m_phi_minus(spec, &spec.dual[0], f).re
}

/// `((S^t)^k w)_j` for `k = 0..=kmax`: the mass of `f` on an order-`k`
/// supertile of type `j`.
pub fn mass_table(sys: &SubstitutionSystem, w: &[f64], kmax: usize) -> Vec<Vec<f64>> {
    let s = sys.substitution_matrix();
    let m = sys.m();
    let mut table = vec![w.to_vec()];
    for _ in 0..kmax {
        let prev = table.last().expect("nonempty");
        let next = (0..m).map(|j| (0..m).map(|i| s[i][j] as f64 * prev[i]).sum()).collect();
        table.push(next);
    }
    table
}

fn integral_from_summary(sys: &SubstitutionSystem, f: &CylFunction, s: &CaptureSummary) -> f64 {
    let table = mass_table(sys, &f.weights(sys), s.max_order());
    let frontier: f64 = f.c.iter().zip(&s.frontier_volume).map(|(c, v)| c * v).sum();
    s.pair_real(&table) + frontier
}

/// `int_dom f(T - y) dy`, exact for constant densities.
pub fn ergodic_integral(view: &TilingView, f: &CylFunction, dom: &Domain) -> Result<f64> {
    let sys = view.system();
    f.check(sys.m())?;
    let s = capture_summary(view, dom)?;
    Ok(integral_from_summary(sys, f, &s))
}

/// Number of order-0 tiles of type `i` contained in `dom`.
pub fn tile_count(view: &TilingView, i: usize, dom: &Domain) -> Result<u128> {
    let sys = view.system();
    if i >= sys.m() {
        return Err(Error::InvalidArgument(format!("prototile index {i} out of range")));
    }
    let s = capture_summary(view, dom)?;
    let mat = sys.substitution_matrix();
    let mut total = 0u128;
    for (k, row) in s.counts.iter().enumerate() {
        if row.iter().all(|&n| n == 0) {
            continue;
        }
        let p = matrix_power(&mat, k as u32);
        for (j, &n) in row.iter().enumerate() {
            total += n as u128 * p[i][j];
        }
    }
    Ok(total)
}

/// `int_dom f(T - y) dy - vol(dom) int f dmu`.
pub fn deviation(
    view: &TilingView,
    spec: &SpectralData,
    f: &CylFunction,
    dom: &Domain,
) -> Result<f64> {
    Ok(evaluate(view, spec, f, dom)?.deviation)
}

/// Deviation minus the rapidly-expanding terms `sum_{n=2}^{ell} Phi+_n m_{Phi-_n}(f)`.
pub fn residual(view: &TilingView, spec: &SpectralData, f: &CylFunction, dom: &Domain) -> Result<f64> {
    Ok(evaluate(view, spec, f, dom)?.residual)
}

/// Everything one descent of a domain yields about `f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub volume: f64,
    pub integral: f64,
    pub deviation: f64,
    /// `|deviation - sum_{n=2}^{ell} Re(Phi+_n(dom) m_{Phi-_n}(f))|`.
    pub residual: f64,
    /// `Phi+_{v^(2)}(dom)` (zero when `ell < 2`).
    pub phi2: C,
    /// Imaginary part left over after pairing conjugate terms.
    pub imag_residue: f64,
    pub frontier_count: u64,
    pub frontier_volume: f64,
}

pub fn evaluate_summary(
    sys: &SubstitutionSystem,
    spec: &SpectralData,
    f: &CylFunction,
    dom_volume: f64,
    s: &CaptureSummary,
) -> Evaluation {
    let integral = integral_from_summary(sys, f, s);
    let deviation = integral - dom_volume * mean(spec, f);
    let mut correction = C::new(0.0, 0.0);
    let mut scale = 0.0;
    let mut phi2 = C::new(0.0, 0.0);
    for n in 1..spec.ell {
        let table = spec.power_table(&spec.right[n], s.max_order());
        let phi = s.pair(&table);
        if n == 1 {
            phi2 = phi;
        }
        let term = phi * m_phi_minus(spec, &spec.dual[n], f);
        scale += term.norm();
        correction += term;
    }
    Evaluation {
        volume: dom_volume,
        integral,
        deviation,
        residual: (deviation - correction.re).abs(),
        phi2,
        imag_residue: if scale > 0.0 { correction.im.abs() / scale } else { 0.0 },
        frontier_count: s.total_frontier(),
        frontier_volume: s.total_frontier_volume(),
    }
}

pub fn evaluate(
    view: &TilingView,
    spec: &SpectralData,
    f: &CylFunction,
    dom: &Domain,
) -> Result<Evaluation> {
    let sys = view.system();
    f.check(sys.m())?;
    let s = capture_summary(view, dom)?;
    Ok(evaluate_summary(sys, spec, f, dom.volume(), &s))
}

/// `int_dom (f o omega^{-k})(T - y) dy`, computed as `lambda^{dk}` times
/// the integral of `f` over `lambda^{-k} dom` in the tiling `lambda^{-k} T^(k)`.
pub fn pullback_integral(view: &TilingView, f: &CylFunction, k: u32, dom: &Domain) -> Result<f64> {
    let sys = view.system();
    let lk = sys.lambda.powi(k as i32);
    let coarse = view.rescaled(k as i32);
    let inner = ergodic_integral(&coarse, f, &dom.dilate(1.0 / lk))?;
    Ok(lk.powi(sys.dim as i32) * inner)
}

/// The same quantity summed directly over the order-`k` supertiles meeting
/// `dom`, each weighted by the density of its type.
pub fn pullback_integral_direct(
    view: &TilingView,
    f: &CylFunction,
    k: u32,
    dom: &Domain,
) -> Result<f64> {
    let sys = view.system();
    let tiles = view.tiles_intersecting(dom, k as i32)?;
    Ok(tiles.iter().map(|t| f.c[t.kind] * clip_volume(dom, &t.support(sys))).sum())
}
