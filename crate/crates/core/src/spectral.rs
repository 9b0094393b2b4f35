//! Spectral analysis of the substitution matrix.
//!
//! The right basis `v^(n)` consists of Jordan chains of `S^t`; the dual basis
//! `u^(n)` satisfies `sum_j v^(i)_j u^(n)_j = delta_in` (no conjugation), so
//! `S` acts on it by the transposed Jordan matrix. Eigenvalues are ordered
//! by decreasing modulus, real before complex, `Im > 0` before its conjugate.

use nalgebra::{ComplexField, DMatrix, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::SubstitutionSystem;

/// Singular values below `RANK_TOL * max(1, |S|)^r` count as zero in `(S - theta)^r`.
pub const RANK_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectralMode {
    /// Rejects Jordan blocks of size > 1 inside the rapidly expanding subspace.
    Eigen,
    /// Accepts them and uses explicit Jordan powers.
    #[default]
    Power,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JordanBlock {
    pub theta: Complex64,
    /// Index of the eigenvector; the chain occupies `start..start + size`.
    pub start: usize,
    pub size: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralData {
    pub dim: usize,
    pub lambda: f64,
    pub matrix: Vec<Vec<u64>>,
    /// `theta_n` for every basis index (repeated along a Jordan chain).
    pub eigenvalues: Vec<Complex64>,
    pub right: Vec<Vec<Complex64>>,
    pub dual: Vec<Vec<Complex64>>,
    pub blocks: Vec<JordanBlock>,
    /// Dimension of the rapidly expanding subspace: `|theta| > lambda^{d-1}`.
    pub ell: usize,
    /// Largest Jordan block with `|theta| = lambda^{d-1}` (0 if none).
    pub s: usize,
    /// Largest Jordan block inside the rapidly expanding subspace.
    pub s_plus: usize,
    pub gamma: f64,
    pub diagonalizable: bool,
    pub mode: SpectralMode,
}

type C = Complex64;

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

/// `C(k, q)` for integer `k` of either sign.
fn binom(k: i64, q: usize) -> f64 {
    let mut r = 1.0;
    for t in 0..q {
        r *= (k - t as i64) as f64 / (t + 1) as f64;
    }
    r
}

/// Orthonormal basis (columns) of the numerical null space of `a`.
fn null_space<T: ComplexField<RealField = f64>>(a: &DMatrix<T>, tol: f64) -> DMatrix<T> {
    let n = a.ncols();
    let svd = SVD::new(a.clone(), false, true);
    let vt = svd.v_t.expect("requested");
    let rank = svd.singular_values.iter().filter(|&&x| x > tol).count();
    let mut out = DMatrix::zeros(n, n - rank);
    for (col, row) in (rank..n).enumerate() {
        for i in 0..n {
            out[(i, col)] = vt[(row, i)].clone().conjugate();
        }
    }
    out
}

/// `k` right singular vectors of `a` for the smallest singular values.
fn smallest_right_vectors<T: ComplexField<RealField = f64>>(a: &DMatrix<T>, k: usize) -> DMatrix<T> {
    let n = a.ncols();
    let svd = SVD::new(a.clone(), false, true);
    let vt = svd.v_t.expect("requested");
    let mut out = DMatrix::zeros(n, k);
    for (col, row) in (n - k..n).enumerate() {
        for i in 0..n {
            out[(i, col)] = vt[(row, i)].clone().conjugate();
        }
    }
    out
}

fn hcat<T: ComplexField<RealField = f64>>(cols: &[DMatrix<T>], rows: usize) -> DMatrix<T> {
    let total: usize = cols.iter().map(|m| m.ncols()).sum();
    let mut out = DMatrix::zeros(rows, total);
    let mut at = 0;
    for m in cols {
        out.view_mut((0, at), (rows, m.ncols())).copy_from(m);
        at += m.ncols();
    }
    out
}

/// Jordan chains of `a` for the eigenvalue `theta` of algebraic multiplicity
/// `mult`. Each chain is returned eigenvector first: `(a - theta) c_q = c_{q-1}`.
fn jordan_chains<T: ComplexField<RealField = f64>>(
    a: &DMatrix<T>,
    theta: T,
    mult: usize,
    scale: f64,
) -> Vec<Vec<DMatrix<T>>> {
    let n = a.nrows();
    let shifted = a - DMatrix::<T>::identity(n, n) * theta;
    let mut power = DMatrix::<T>::identity(n, n);
    for _ in 0..mult {
        power = &power * &shifted;
    }
    // Generalized eigenspace, then the nilpotent part restricted to it.
    let g = smallest_right_vectors(&power, mult);
    let nil = g.adjoint() * &shifted * &g;

    let mut kernels: Vec<DMatrix<T>> = vec![DMatrix::zeros(mult, 0)];
    let mut np = DMatrix::<T>::identity(mult, mult);
    while kernels.last().expect("nonempty").ncols() < mult {
        np = &np * &nil;
        let r = kernels.len() as i32;
        let k = null_space(&np, RANK_TOL * scale.max(1.0).powi(r));
        if k.ncols() <= kernels.last().expect("nonempty").ncols() {
            // Rank test stalled; treat the remainder as one more level.
            kernels.push(DMatrix::identity(mult, mult));
            break;
        }
        kernels.push(k);
    }
    let top = kernels.len() - 1;
    let count_ge = |r: usize| kernels[r].ncols() - kernels[r - 1].ncols();

    // chains[i] holds the chain top vector and its length
    let mut tops: Vec<(DMatrix<T>, usize)> = Vec::new();
    for r in (1..=top).rev() {
        let needed = count_ge(r) - if r < top { count_ge(r + 1) } else { 0 };
        if needed == 0 {
            continue;
        }
        let mut basis = vec![kernels[r - 1].clone()];
        for (w, len) in &tops {
            let mut x = w.clone();
            for _ in 0..(len - r) {
                x = &nil * x;
            }
            basis.push(x);
        }
        let b = hcat(&basis, mult);
        let q = if b.ncols() == 0 {
            DMatrix::zeros(mult, 0)
        } else {
            let svd = SVD::new(b.clone(), true, false);
            let u = svd.u.expect("requested");
            let rank = svd.singular_values.iter().filter(|&&x| x > 1e-10).count();
            u.columns(0, rank).into_owned()
        };
        let kr = &kernels[r];
        let proj = kr - &q * (q.adjoint() * kr);
        let svd = SVD::new(proj, false, true);
        let vt = svd.v_t.expect("requested");
        for t in 0..needed {
            let y = vt.row(t).adjoint();
            let w = kr * y;
            tops.push((DMatrix::from_column_slice(mult, 1, w.as_slice()), r));
        }
    }
    tops.into_iter()
        .map(|(w, len)| {
            let mut chain = vec![w];
            for _ in 1..len {
                let next = &nil * chain.last().expect("nonempty");
                chain.push(next);
            }
            chain.reverse();
            chain.into_iter().map(|x| &g * x).collect()
        })
        .collect()
}

/// Unit norm, largest component real positive.
fn normalize_chain(chain: &mut [Vec<C>]) {
    let e = &chain[0];
    let nrm = e.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let big = e
        .iter()
        .copied()
        .fold(c(0.0), |acc, z| if z.norm() > acc.norm() + 1e-12 { z } else { acc });
    let phase = if big.norm() > 0.0 { big.conj() / big.norm() } else { c(1.0) };
    let f = phase / nrm;
    for v in chain.iter_mut() {
        for z in v.iter_mut() {
            *z *= f;
        }
    }
}

fn to_complex_vec<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> Vec<C> {
    m.iter().map(|z| C::new(z.clone().real(), z.clone().imaginary())).collect()
}

impl SpectralData {
    /// Spectral data of `S` for a system with dilation `lambda` in dimension
    /// `dim`; `volumes` becomes `v^(1)`.
    pub fn new(
        matrix: &[Vec<u64>],
        lambda: f64,
        dim: usize,
        volumes: &[f64],
        mode: SpectralMode,
    ) -> Result<Self> {
        let m = matrix.len();
        if m == 0 || matrix.iter().any(|r| r.len() != m) || volumes.len() != m {
            return Err(Error::InvalidArgument("matrix must be square and match volumes".into()));
        }
        let st = DMatrix::<f64>::from_fn(m, m, |i, j| matrix[j][i] as f64);
        let scale = st.norm();
        let raw: Vec<C> = st.clone().complex_eigenvalues().iter().copied().collect();

        let ctol = 1e-4 * scale.max(1.0);
        let mut clusters: Vec<Vec<C>> = Vec::new();
        for z in raw {
            match clusters.iter_mut().find(|cl| (cl[0] - z).norm() < ctol) {
                Some(cl) => cl.push(z),
                None => clusters.push(vec![z]),
            }
        }
        let mut centers: Vec<(C, usize)> = Vec::new();
        for cl in &clusters {
            let mean = cl.iter().sum::<C>() / cl.len() as f64;
            if mean.im.abs() < ctol {
                centers.push((c(mean.re), cl.len()));
            } else if mean.im > 0.0 {
                centers.push((mean, cl.len()));
                centers.push((mean.conj(), cl.len()));
            }
        }
        if centers.iter().map(|x| x.1).sum::<usize>() != m {
            return Err(Error::InvalidArgument("eigenvalue clustering failed".into()));
        }
        centers.sort_by(|a, b| {
            b.0.norm()
                .partial_cmp(&a.0.norm())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then((a.0.im != 0.0).cmp(&(b.0.im != 0.0)))
                .then(b.0.re.total_cmp(&a.0.re))
                .then(b.0.im.total_cmp(&a.0.im))
        });
        // Moduli equal up to clustering noise keep the order above.
        let expected = lambda.powi(dim as i32);
        let (theta1, mult1) = centers[0];
        if mult1 != 1 || theta1.im != 0.0 {
            return Err(Error::SpectralGapFail { gap: 0.0 });
        }
        if (theta1.re - expected).abs() > 1e-6 * expected {
            return Err(Error::LambdaMismatch { theta1: theta1.re, expected });
        }
        if m > 1 {
            let gap = theta1.norm() - centers[1].0.norm();
            if gap < 1e-6 {
                return Err(Error::SpectralGapFail { gap });
            }
        }

        let stc = st.map(c);
        let mut eigenvalues = Vec::with_capacity(m);
        let mut right: Vec<Vec<C>> = Vec::with_capacity(m);
        let mut blocks = Vec::new();
        let mut done_conj: Vec<(C, Vec<Vec<Vec<C>>>)> = Vec::new();
        for (idx, &(theta, mult)) in centers.iter().enumerate() {
            let chains: Vec<Vec<Vec<C>>> = if idx == 0 {
                vec![vec![volumes.iter().map(|&x| c(x)).collect()]]
            } else if theta.im == 0.0 {
                jordan_chains(&st, theta.re, mult, scale)
                    .iter()
                    .map(|ch| ch.iter().map(to_complex_vec).collect())
                    .collect()
            } else if theta.im < 0.0 {
                let pos = done_conj
                    .iter()
                    .find(|(t, _)| (t.conj() - theta).norm() < 1e-12)
                    .map(|(_, ch)| ch.clone())
                    .expect("conjugate processed first");
                pos.iter()
                    .map(|ch| ch.iter().map(|v| v.iter().map(|z| z.conj()).collect()).collect())
                    .collect()
            } else {
                jordan_chains(&stc, theta, mult, scale)
                    .iter()
                    .map(|ch| ch.iter().map(to_complex_vec).collect())
                    .collect()
            };
            let mut chains = chains;
            if idx > 0 && theta.im >= 0.0 {
                for ch in chains.iter_mut() {
                    normalize_chain(ch);
                }
                chains.sort_by_key(|c| std::cmp::Reverse(c.len()));
            }
            if theta.im > 0.0 {
                done_conj.push((theta, chains.clone()));
            }
            let theta = if idx == 0 { c(expected) } else { theta };
            for ch in chains {
                blocks.push(JordanBlock { theta, start: right.len(), size: ch.len() });
                for v in ch {
                    eigenvalues.push(theta);
                    right.push(v);
                }
            }
        }

        let p = DMatrix::<C>::from_fn(m, m, |i, n| right[n][i]);
        let pinv = p
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("singular Jordan basis".into()))?;
        // U = P^{-T}: column n of U is row n of P^{-1}
        let dual: Vec<Vec<C>> = (0..m).map(|n| (0..m).map(|j| pinv[(n, j)]).collect()).collect();

        let thr = lambda.powi(dim as i32 - 1);
        let rel = 1e-9 * thr.max(1.0);
        let ell = eigenvalues.iter().filter(|z| z.norm() > thr + rel).count();
        let s = blocks
            .iter()
            .filter(|b| (b.theta.norm() - thr).abs() <= rel)
            .map(|b| b.size)
            .max()
            .unwrap_or(0);
        let s_plus =
            blocks.iter().filter(|b| b.theta.norm() > thr + rel).map(|b| b.size).max().unwrap_or(0);
        let min_epp = eigenvalues[..ell].iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        let gamma = (thr + min_epp) / 2.0;
        let diagonalizable = blocks.iter().all(|b| b.size == 1);
        if mode == SpectralMode::Eigen && s_plus > 1 {
            return Err(Error::DefectiveEpp { size: s_plus });
        }
        Ok(SpectralData {
            dim,
            lambda,
            matrix: matrix.to_vec(),
            eigenvalues,
            right,
            dual,
            blocks,
            ell,
            s,
            s_plus,
            gamma,
            diagonalizable,
            mode,
        })
    }

    pub fn from_system(sys: &SubstitutionSystem, mode: SpectralMode) -> Result<Self> {
        Self::new(&sys.substitution_matrix(), sys.lambda, sys.dim, &sys.volumes(), mode)
    }

    pub fn m(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn theta1(&self) -> f64 {
        self.eigenvalues[0].re
    }

    /// `d log|theta_2| / log theta_1`, when a second eigenvalue exists and is nonzero.
    pub fn alpha(&self) -> Option<f64> {
        let t2 = self.eigenvalues.get(1)?.norm();
        (t2 > 0.0).then(|| self.dim as f64 * t2.ln() / self.theta1().ln())
    }

    /// Tile frequencies per unit volume: `u^(1)`, real and positive.
    pub fn frequencies(&self) -> Vec<f64> {
        self.dual[0].iter().map(|z| z.re).collect()
    }

    /// Coordinates `a_n = <v, u^(n)>` of `v` in the right basis.
    pub fn coefficients(&self, v: &[C]) -> Vec<C> {
        self.dual.iter().map(|u| u.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// Coordinates `b_n = <v^(n), u>` of `u` in the dual basis.
    pub fn dual_coefficients(&self, u: &[C]) -> Vec<C> {
        self.right.iter().map(|v| v.iter().zip(u).map(|(a, b)| a * b).sum()).collect()
    }

    fn outside_epp(&self, coef: &[C]) -> bool {
        let total = coef.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        coef[self.ell..].iter().any(|z| z.norm() > 1e-8 * total)
    }

    /// Whether `v` lies in the rapidly expanding subspace.
    pub fn in_epp(&self, v: &[C]) -> bool {
        !self.outside_epp(&self.coefficients(v))
    }

    /// `(S^t)^k v` through the Jordan decomposition; `k < 0` requires `v` in E++.
    pub fn apply_power(&self, v: &[C], k: i64) -> Result<Vec<C>> {
        let coef = self.coefficients(v);
        if k < 0 && self.outside_epp(&coef) {
            return Err(Error::NegativePowerOutsideEpp);
        }
        let mut out_coef = vec![c(0.0); self.m()];
        for b in &self.blocks {
            if k < 0 && b.start >= self.ell {
                continue;
            }
            for q in 0..b.size {
                // J acts on chain coordinates by a_q <- theta a_q + a_{q+1}.
                let mut acc = c(0.0);
                for p in 0..b.size - q {
                    acc += coef[b.start + q + p] * c(binom(k, p)) * theta_pow(b.theta, k, p);
                }
                out_coef[b.start + q] = acc;
            }
        }
        Ok(self.combine(&self.right, &out_coef))
    }

    /// `S^k u` through the dual Jordan decomposition; `k < 0` requires `u`
    /// in the span of the E++ dual vectors.
    pub fn apply_power_dual(&self, u: &[C], k: i64) -> Result<Vec<C>> {
        let coef = self.dual_coefficients(u);
        if k < 0 && self.outside_epp(&coef) {
            return Err(Error::NegativePowerOutsideEpp);
        }
        let mut out_coef = vec![c(0.0); self.m()];
        for b in &self.blocks {
            if k < 0 && b.start >= self.ell {
                continue;
            }
            for q in 0..b.size {
                // J^t acts by b_q <- theta b_q + b_{q-1}.
                let mut acc = c(0.0);
                for p in 0..=q {
                    acc += coef[b.start + q - p] * c(binom(k, p)) * theta_pow(b.theta, k, p);
                }
                out_coef[b.start + q] = acc;
            }
        }
        Ok(self.combine(&self.dual, &out_coef))
    }

    fn combine(&self, basis: &[Vec<C>], coef: &[C]) -> Vec<C> {
        let mut out = vec![c(0.0); self.m()];
        for (b, a) in basis.iter().zip(coef) {
            for (o, x) in out.iter_mut().zip(b) {
                *o += a * x;
            }
        }
        out
    }

    /// `(S^t)^k v` for `k = 0..=kmax`.
    pub fn power_table(&self, v: &[C], kmax: usize) -> Vec<Vec<C>> {
        (0..=kmax as i64).map(|k| self.apply_power(v, k).expect("k >= 0")).collect()
    }

    /// Largest entrywise deviation of `<v^(i), u^(j)>` from the identity.
    pub fn biorthogonality_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, v) in self.right.iter().enumerate() {
            for (j, u) in self.dual.iter().enumerate() {
                let dot: C = v.iter().zip(u).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).norm());
            }
        }
        worst
    }

    /// Measured constant in `|(S^t)^k v| <= C gamma^k |v|` over
    /// `-kmax <= k <= 0` and the E++ basis vectors.
    pub fn growth_constant(&self, kmax: i64) -> f64 {
        let mut worst = 0.0f64;
        for v in &self.right[..self.ell] {
            let n0 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for k in -kmax..=0 {
                let w = self.apply_power(v, k).expect("E++ vector");
                let n = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                worst = worst.max(n / (self.gamma.powi(k as i32) * n0));
            }
        }
        worst
    }

    pub fn report(&self) -> SpectralReport {
        SpectralReport {
            eigenvalues: self.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
            moduli: self.eigenvalues.iter().map(|z| z.norm()).collect(),
            ell: self.ell,
            s: self.s,
            s_plus: self.s_plus,
            gamma: self.gamma,
            alpha: self.alpha(),
            diagonalizable: self.diagonalizable,
            frequencies: self.frequencies(),
        }
    }
}

/// `theta^{k-p}`, with `0^0 = 1`.
fn theta_pow(theta: C, k: i64, p: usize) -> C {
    let e = k - p as i64;
    if e == 0 {
        c(1.0)
    } else if theta.norm() == 0.0 {
        c(0.0)
    } else {
        theta.powi(e as i32)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    /// `[re, im]` pairs.
    pub eigenvalues: Vec<[f64; 2]>,
    pub moduli: Vec<f64>,
    pub ell: usize,
    pub s: usize,
    pub s_plus: usize,
    pub gamma: f64,
    pub alpha: Option<f64>,
    pub diagonalizable: bool,
    pub frequencies: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binom(5, 2), 10.0);
        assert_eq!(binom(-1, 3), -1.0);
        assert_eq!(binom(-2, 2), 3.0);
        assert_eq!(binom(3, 0), 1.0);
    }

    #[test]
    fn defective_block_at_boundary_modulus() {
        // eigenvalues 3, -1, -1 with a single 2-block at -1
        let s = vec![vec![1, 5, 3], vec![1, 0, 0], vec![0, 1, 0]];
        let perron = [1.0, 2.0, 1.0];
        let st = DMatrix::<f64>::from_fn(3, 3, |i, j| s[j][i] as f64);
        let v = nalgebra::DVector::from_vec(perron.to_vec());
        assert!(((&st * &v) - &v * 3.0).norm() < 1e-12);
        let sd = SpectralData::new(&s, 3.0, 1, &perron, SpectralMode::Eigen).unwrap();
        assert_eq!(sd.ell, 1);
        assert_eq!(sd.s, 2);
        assert!(!sd.diagonalizable);
        assert!(sd.biorthogonality_residual() < 1e-8);
    }

    #[test]
    fn defective_block_inside_epp() {
        // eigenvalues 4, -2, -2 (one 2-block), all above lambda^0 = 1
        let s = vec![vec![0, 12, 16], vec![1, 0, 0], vec![0, 1, 0]];
        let st = DMatrix::<f64>::from_fn(3, 3, |i, j| s[j][i] as f64);
        let eig = st.clone().complex_eigenvalues();
        assert!(eig.iter().any(|z| (z - c(4.0)).norm() < 1e-9));
        let perron = [1.0, 4.0, 4.0];
        let v = nalgebra::DVector::from_vec(perron.to_vec());
        assert!(((&st * &v) - &v * 4.0).norm() < 1e-12);
        assert!(matches!(
            SpectralData::new(&s, 4.0, 1, &perron, SpectralMode::Eigen),
            Err(Error::DefectiveEpp { size: 2 })
        ));
        let sd = SpectralData::new(&s, 4.0, 1, &perron, SpectralMode::Power).unwrap();
        assert_eq!((sd.ell, sd.s_plus), (3, 2));
        assert!(sd.biorthogonality_residual() < 1e-8);
        let x: Vec<C> = vec![c(1.0), c(-2.0), c(0.5)];
        let y = sd.apply_power(&x, 4).unwrap();
        let back = sd.apply_power(&y, -4).unwrap();
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).norm() < 1e-9);
        }
        // against direct matrix powers
        let mut direct = nalgebra::DVector::from_vec(vec![1.0, -2.0, 0.5]);
        for _ in 0..4 {
            direct = &st * direct;
        }
        for (a, b) in y.iter().zip(direct.iter()) {
            assert!((a - c(*b)).norm() < 1e-8 * 256.0);
        }
    }

    #[test]
    fn lambda_mismatch_is_reported() {
        let s = vec![vec![1, 1], vec![1, 0]];
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(matches!(
            SpectralData::new(&s, 1.7, 1, &[phi, 1.0], SpectralMode::Power),
            Err(Error::LambdaMismatch { .. })
        ));
    }
}
