//! Geometric and combinatorial validation of substitution systems.
//!
//! For every prototile `j` the children `A_i + x`, `x ∈ D_ij`, must tile
//! `lambda A_j`: no gap (cover), no pairwise overlap, nothing sticking out.
//! Systems with an integer dilation are checked in exact rational arithmetic
//! on the (exactly representable) f64 coordinates.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{clip_convex, polygon_area, ConvexPiece, Point, Scalar};
use crate::system::SubstitutionSystem;

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "code")]
pub enum Rejection {
    #[serde(rename = "REJECT_COVER")]
    Cover { prototile: usize, deficit: f64 },
    #[serde(rename = "REJECT_OVERLAP")]
    Overlap { prototile: usize, area: f64, detail: String },
    #[serde(rename = "REJECT_PRIMITIVITY")]
    Primitivity { max_power: u32 },
}

impl Rejection {
    pub fn code(&self) -> &'static str {
        match self {
            Rejection::Cover { .. } => "REJECT_COVER",
            Rejection::Overlap { .. } => "REJECT_OVERLAP",
            Rejection::Primitivity { .. } => "REJECT_PRIMITIVITY",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arithmetic {
    ExactRational,
    Floating,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    pub system: String,
    pub arithmetic: Arithmetic,
    pub tol: f64,
    /// `sum_i #D_ij vol(A_i) - lambda^d vol(A_j)` per prototile.
    pub volume_residuals: Vec<f64>,
    /// `lambda^d vol(A_j)` minus the measure of the union of children inside it.
    pub cover_deficits: Vec<f64>,
    /// Measure of children lying outside `lambda A_j`.
    pub escape_volumes: Vec<f64>,
    /// Largest pairwise child overlap per prototile.
    pub max_pair_overlaps: Vec<f64>,
    pub primitive: bool,
    /// Smallest `k` with `S^k > 0`.
    pub primitivity_power: Option<u32>,
    pub rejections: Vec<Rejection>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.rejections.is_empty()
    }

    pub fn into_result(self) -> Result<ValidationReport> {
        if self.is_valid() {
            Ok(self)
        } else {
            Err(Error::Rejected(self.rejections))
        }
    }
}

pub fn validate_system(sys: &SubstitutionSystem, tol: f64) -> ValidationReport {
    assert!(tol > 0.0, "tolerance must be positive");
    let integer_lambda = (sys.lambda - sys.lambda.round()).abs() < 1e-12;
    let (arithmetic, per_tile) = if integer_lambda {
        let lam = BigRational::from_integer((sys.lambda.round() as i64).into());
        let conv = |x: f64| BigRational::from_float(x).expect("finite coordinate");
        (Arithmetic::ExactRational, check_tiles(sys, lam, &conv, |x| x.to_f64().unwrap_or(f64::NAN)))
    } else {
        (Arithmetic::Floating, check_tiles(sys, sys.lambda, &|x| x, |x| x))
    };

    let mut rejections = Vec::new();
    let mut report = ValidationReport {
        system: sys.name.clone(),
        arithmetic,
        tol,
        volume_residuals: Vec::new(),
        cover_deficits: Vec::new(),
        escape_volumes: Vec::new(),
        max_pair_overlaps: Vec::new(),
        primitive: false,
        primitivity_power: None,
        rejections: Vec::new(),
    };
    for (j, t) in per_tile.into_iter().enumerate() {
        let id = sys.prototiles[j].id;
        if t.deficit > tol {
            rejections.push(Rejection::Cover { prototile: id, deficit: t.deficit });
        }
        if t.max_overlap > tol {
            rejections.push(Rejection::Overlap {
                prototile: id,
                area: t.max_overlap,
                detail: "children overlap".into(),
            });
        }
        if t.escape > tol {
            rejections.push(Rejection::Overlap {
                prototile: id,
                area: t.escape,
                detail: "child extends outside the inflated prototile".into(),
            });
        }
        report.volume_residuals.push(t.residual);
        report.cover_deficits.push(t.deficit);
        report.escape_volumes.push(t.escape);
        report.max_pair_overlaps.push(t.max_overlap);
    }
    let s = sys.substitution_matrix();
    let max_power = 2 * (s.len() * s.len()) as u32;
    report.primitivity_power = primitivity_power(&s, max_power);
    report.primitive = report.primitivity_power.is_some();
    if !report.primitive {
        rejections.push(Rejection::Primitivity { max_power });
    }
    report.rejections = rejections;
    report
}

/// Smallest `k <= max_power` with `S^k` entrywise positive.
pub fn primitivity_power(s: &[Vec<u64>], max_power: u32) -> Option<u32> {
    let n = s.len();
    let pattern: Vec<Vec<bool>> = s.iter().map(|r| r.iter().map(|&x| x > 0).collect()).collect();
    let mut acc = pattern.clone();
    for k in 1..=max_power {
        if acc.iter().all(|r| r.iter().all(|&x| x)) {
            return Some(k);
        }
        let mut next = vec![vec![false; n]; n];
        for i in 0..n {
            for l in 0..n {
                if acc[i][l] {
                    for j in 0..n {
                        next[i][j] |= pattern[l][j];
                    }
                }
            }
        }
        acc = next;
    }
    None
}

struct TileCheck {
    residual: f64,
    deficit: f64,
    escape: f64,
    max_overlap: f64,
}

#[derive(Clone)]
enum Piece<T> {
    Seg(T, T),
    Poly(Vec<[T; 2]>),
}

fn overlap<T: Scalar>(a: &Piece<T>, b: &Piece<T>) -> T {
    match (a, b) {
        (Piece::Seg(a0, a1), Piece::Seg(b0, b1)) => {
            let lo = if a0 > b0 { a0.clone() } else { b0.clone() };
            let hi = if a1 < b1 { a1.clone() } else { b1.clone() };
            if hi > lo {
                hi - lo
            } else {
                T::zero()
            }
        }
        (Piece::Poly(p), Piece::Poly(q)) => polygon_area(&clip_convex(p, q)),
        _ => T::zero(),
    }
}

fn measure<T: Scalar>(a: &Piece<T>) -> T {
    match a {
        Piece::Seg(a0, a1) => a1.clone() - a0.clone(),
        Piece::Poly(p) => polygon_area(p),
    }
}

fn check_tiles<T: Scalar>(
    sys: &SubstitutionSystem,
    lambda: T,
    conv: &dyn Fn(f64) -> T,
    back: impl Fn(T) -> f64,
) -> Vec<TileCheck> {
    let place = |piece: &ConvexPiece, s: &T, x: Point| -> Piece<T> {
        match piece {
            ConvexPiece::Segment(lo, hi) => Piece::Seg(
                conv(*lo) * s.clone() + conv(x[0]),
                conv(*hi) * s.clone() + conv(x[0]),
            ),
            ConvexPiece::Polygon(v) => Piece::Poly(
                v.iter()
                    .map(|p| {
                        [conv(p[0]) * s.clone() + conv(x[0]), conv(p[1]) * s.clone() + conv(x[1])]
                    })
                    .collect(),
            ),
        }
    };
    let one = T::one();
    let m = sys.m();
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        let parent: Vec<Piece<T>> =
            sys.prototiles[j].pieces.iter().map(|p| place(p, &lambda, [0.0, 0.0])).collect();
        let children: Vec<Vec<Piece<T>>> = (0..m)
            .flat_map(|i| sys.digits[i][j].iter().map(move |x| (i, *x)))
            .map(|(i, x)| sys.prototiles[i].pieces.iter().map(|p| place(p, &one, x)).collect())
            .collect();
        let parent_vol = parent.iter().fold(T::zero(), |a, p| a + measure(p));
        let mut child_total = T::zero();
        let mut inside = T::zero();
        for c in &children {
            for cp in c {
                child_total = child_total + measure(cp);
                for pp in &parent {
                    inside = inside + overlap(cp, pp);
                }
            }
        }
        let mut pair_sum = T::zero();
        let mut max_overlap = T::zero();
        for a in 0..children.len() {
            for b in a + 1..children.len() {
                let mut o = T::zero();
                for pa in &children[a] {
                    for pb in &children[b] {
                        o = o + overlap(pa, pb);
                    }
                }
                if o > max_overlap {
                    max_overlap = o.clone();
                }
                pair_sum = pair_sum + o;
            }
        }
        let residual = child_total.clone() - parent_vol.clone();
        let deficit = parent_vol - (inside.clone() - pair_sum);
        let escape = child_total - inside;
        out.push(TileCheck {
            residual: back(residual),
            deficit: back(deficit),
            escape: back(escape),
            max_overlap: back(max_overlap),
        });
    }
    out
}
