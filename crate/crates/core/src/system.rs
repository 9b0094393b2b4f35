//! Substitution systems: prototiles, digit sets and the substitution matrix.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{norm, sub, ConvexPiece, Point, TileSupport};

/// Relative geometric tolerance; the absolute tolerance is `GEPS_REL * d_min`.
pub const GEPS_REL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Prototile {
    /// 1-based type index as it appears in the JSON format.
    pub id: usize,
    pub pieces: Vec<ConvexPiece>,
    volume: f64,
    diameter: f64,
    inradius: f64,
}

impl Prototile {
    pub fn new(id: usize, pieces: Vec<ConvexPiece>) -> Result<Self> {
        let dim = match pieces.first() {
            Some(p) => p.dim(),
            None => return Err(Error::Malformed(format!("prototile {id} has no pieces"))),
        };
        if pieces.iter().any(|p| p.dim() != dim) {
            return Err(Error::Malformed(format!("prototile {id} mixes dimensions")));
        }
        let volume: f64 = pieces.iter().map(ConvexPiece::measure).sum();
        let verts: Vec<Point> = pieces.iter().flat_map(ConvexPiece::vertices).collect();
        let mut diameter = 0.0f64;
        for a in &verts {
            for b in &verts {
                diameter = diameter.max(norm(sub(*a, *b)));
            }
        }
        let inradius = pieces.iter().map(|p| p.inball().0).fold(0.0, f64::max);
        if !(volume > 0.0 && diameter > 0.0 && inradius > 0.0) {
            return Err(Error::Malformed(format!("prototile {id} is degenerate")));
        }
        Ok(Prototile { id, pieces, volume, diameter, inradius })
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].dim()
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Radius of the largest ball inside a single convex piece.
    pub fn inradius(&self) -> f64 {
        self.inradius
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemMetrics {
    pub d_max: f64,
    pub d_min: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub eta: f64,
}

/// A self-similar tile substitution with expansion `x -> lambda x`.
///
/// `digits[i][j]` is the digit set D_ij: the translations `x` such that
/// `A_i + x` is a tile of the subdivision of `lambda A_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubstitutionSystem {
    pub name: String,
    pub dim: usize,
    pub lambda: f64,
    pub prototiles: Vec<Prototile>,
    pub digits: Vec<Vec<Vec<Point>>>,
    metrics: SystemMetrics,
}

impl SubstitutionSystem {
    /// Assembles a system without geometric validation (see [`crate::validate`]).
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        lambda: f64,
        prototiles: Vec<Prototile>,
        digits: Vec<Vec<Vec<Point>>>,
    ) -> Result<Self> {
        let m = prototiles.len();
        if !(dim == 1 || dim == 2) {
            return Err(Error::Malformed(format!("dimension {dim} unsupported")));
        }
        if !(lambda.is_finite() && lambda > 1.0) {
            return Err(Error::Malformed(format!("dilation {lambda} must exceed 1")));
        }
        if m == 0 {
            return Err(Error::Malformed("no prototiles".into()));
        }
        if prototiles.iter().any(|p| p.dim() != dim) {
            return Err(Error::Malformed("prototile dimension mismatch".into()));
        }
        if digits.len() != m || digits.iter().any(|row| row.len() != m) {
            return Err(Error::Malformed("digit table must be m x m".into()));
        }
        let d_max = prototiles.iter().map(Prototile::diameter).fold(0.0, f64::max);
        let d_min = prototiles.iter().map(Prototile::diameter).fold(f64::INFINITY, f64::min);
        let a_max = prototiles.iter().map(Prototile::volume).fold(0.0, f64::max);
        let a_min = prototiles.iter().map(Prototile::volume).fold(f64::INFINITY, f64::min);
        let eta = prototiles.iter().map(Prototile::inradius).fold(f64::INFINITY, f64::min);
        Ok(SubstitutionSystem {
            name: name.into(),
            dim,
            lambda,
            prototiles,
            digits,
            metrics: SystemMetrics { d_max, d_min, a_min, a_max, eta },
        })
    }

    pub fn m(&self) -> usize {
        self.prototiles.len()
    }

    pub fn metrics(&self) -> SystemMetrics {
        self.metrics
    }

    /// Absolute geometric tolerance `geps`.
    pub fn geps(&self) -> f64 {
        GEPS_REL * self.metrics.d_min
    }

    pub fn volumes(&self) -> Vec<f64> {
        self.prototiles.iter().map(Prototile::volume).collect()
    }

    /// `lambda^d`, the Perron–Frobenius eigenvalue of a consistent system.
    pub fn theta1(&self) -> f64 {
        self.lambda.powi(self.dim as i32)
    }

    /// `S_ij = #D_ij`.
    pub fn substitution_matrix(&self) -> Vec<Vec<u64>> {
        self.digits.iter().map(|row| row.iter().map(|d| d.len() as u64).collect()).collect()
    }

    /// Support of prototile `j` scaled by `scale` and translated by `offset`.
    pub fn support(&self, j: usize, scale: f64, offset: Point) -> TileSupport<'_> {
        let mag = offset[0].abs().max(offset[1].abs()) + scale * self.metrics.d_max;
        TileSupport {
            pieces: &self.prototiles[j].pieces,
            scale,
            offset,
            tol: self.geps() + 64.0 * f64::EPSILON * mag,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let sys = Self::from_json_unchecked(text)?;
        crate::validate::validate_system(&sys, crate::validate::DEFAULT_TOL).into_result()?;
        Ok(sys)
    }

    /// Parses the JSON format without running geometric validation.
    pub fn from_json_unchecked(text: &str) -> Result<Self> {
        let raw: SystemJson = serde_json::from_str(text)?;
        raw.into_system()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SystemJson::from_system(self)).expect("serializable")
    }
}

/// The on-disk system format.
#[derive(Debug, Serialize, Deserialize)]
pub struct SystemJson {
    pub name: String,
    pub d: usize,
    pub lambda: f64,
    pub prototiles: Vec<PrototileJson>,
    /// Keyed by `"i,j"` (1-based prototile ids): translations of type-i
    /// children inside the image of type j.
    pub digits: BTreeMap<String, Vec<Vec<f64>>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PrototileJson {
    pub id: usize,
    pub pieces: Vec<Vec<Vec<f64>>>,
}

fn parse_point(v: &[f64], d: usize) -> Result<Point> {
    if v.len() != d {
        return Err(Error::Malformed(format!("expected a {d}-vector, got {v:?}")));
    }
    Ok(if d == 1 { [v[0], 0.0] } else { [v[0], v[1]] })
}

impl SystemJson {
    fn into_system(self) -> Result<SubstitutionSystem> {
        let d = self.d;
        if !(d == 1 || d == 2) {
            return Err(Error::Malformed(format!("dimension {d} unsupported")));
        }
        let mut ids: Vec<usize> = self.prototiles.iter().map(|p| p.id).collect();
        ids.sort_unstable();
        if ids != (1..=ids.len()).collect::<Vec<_>>() {
            return Err(Error::Malformed("prototile ids must be 1..m".into()));
        }
        let mut protos = self.prototiles;
        protos.sort_by_key(|p| p.id);
        let mut prototiles = Vec::with_capacity(protos.len());
        for p in protos {
            let mut pieces = Vec::new();
            for raw in &p.pieces {
                let pts = raw.iter().map(|v| parse_point(v, d)).collect::<Result<Vec<_>>>()?;
                let piece = if d == 1 {
                    if pts.len() != 2 {
                        return Err(Error::Malformed("1-d pieces are [[lo],[hi]]".into()));
                    }
                    ConvexPiece::segment(pts[0][0].min(pts[1][0]), pts[0][0].max(pts[1][0]))?
                } else {
                    ConvexPiece::polygon(pts)?
                };
                pieces.push(piece);
            }
            prototiles.push(Prototile::new(p.id, pieces)?);
        }
        let m = prototiles.len();
        let mut digits = vec![vec![Vec::new(); m]; m];
        for (key, list) in &self.digits {
            let mut it = key.split(',').map(|s| s.trim().parse::<usize>());
            let (Some(Ok(i)), Some(Ok(j)), None) = (it.next(), it.next(), it.next()) else {
                return Err(Error::Malformed(format!("bad digit key `{key}`")));
            };
            if !(1..=m).contains(&i) || !(1..=m).contains(&j) {
                return Err(Error::Malformed(format!("digit key `{key}` out of range")));
            }
            digits[i - 1][j - 1] = list.iter().map(|v| parse_point(v, d)).collect::<Result<_>>()?;
        }
        SubstitutionSystem::new(self.name, d, self.lambda, prototiles, digits)
    }

    fn from_system(sys: &SubstitutionSystem) -> Self {
        let d = sys.dim;
        let pt = |p: &Point| if d == 1 { vec![p[0]] } else { vec![p[0], p[1]] };
        let prototiles = sys
            .prototiles
            .iter()
            .map(|p| PrototileJson {
                id: p.id,
                pieces: p.pieces.iter().map(|x| x.vertices().iter().map(pt).collect()).collect(),
            })
            .collect();
        let mut digits = BTreeMap::new();
        for (i, row) in sys.digits.iter().enumerate() {
            for (j, list) in row.iter().enumerate() {
                if !list.is_empty() {
                    digits.insert(format!("{},{}", i + 1, j + 1), list.iter().map(pt).collect());
                }
            }
        }
        SystemJson { name: sys.name.clone(), d, lambda: sys.lambda, prototiles, digits }
    }
}

/// Integer matrix product.
pub(crate) fn mat_mul(a: &[Vec<u128>], b: &[Vec<u128>]) -> Vec<Vec<u128>> {
    let n = a.len();
    let mut c = vec![vec![0u128; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == 0 {
                continue;
            }
            for j in 0..n {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

/// `S^k` in exact integer arithmetic.
pub fn matrix_power(s: &[Vec<u64>], k: u32) -> Vec<Vec<u128>> {
    let n = s.len();
    let base: Vec<Vec<u128>> = s.iter().map(|r| r.iter().map(|&x| x as u128).collect()).collect();
    let mut acc: Vec<Vec<u128>> =
        (0..n).map(|i| (0..n).map(|j| u128::from(i == j)).collect()).collect();
    for _ in 0..k {
        acc = mat_mul(&acc, &base);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_powers() {
        let s = vec![vec![7, 2], vec![2, 7]];
        assert_eq!(matrix_power(&s, 2), vec![vec![53, 28], vec![28, 53]]);
        assert_eq!(matrix_power(&s, 0), vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn rejects_bad_ids() {
        let text = r#"{"name":"x","d":1,"lambda":2.0,
            "prototiles":[{"id":2,"pieces":[[[0],[1]]]}],
            "digits":{"1,1":[[0],[1]]}}"#;
        assert!(matches!(SubstitutionSystem::from_json_unchecked(text), Err(Error::Malformed(_))));
    }
}
