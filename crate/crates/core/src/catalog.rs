//! Built-in substitution systems covering the deviation regimes.

use serde::{Deserialize, Serialize};

use crate::ergodic::CylFunction;
use crate::error::{Error, Result};
use crate::geometry::{ConvexPiece, Point};
use crate::spectral::{SpectralData, SpectralMode};
use crate::system::{Prototile, SubstitutionSystem};
use crate::validate::{validate_system, DEFAULT_TOL};

pub const NAMES: [&str; 5] = ["fibonacci", "nonpisot13", "table2d", "chair", "bicolor3x3"];

/// Growth regime of the deviation of ergodic averages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `d = 1` and `|theta_2| < 1`: deviations stay bounded.
    Bounded,
    /// `|theta_2| < lambda^{d-1}`: boundary-dominated, `O(R^{d-1})`.
    Boundary,
    /// `|theta_2| = lambda^{d-1}`: `O(R^{d-1} (log R)^s)`.
    LogCorrected,
    /// `|theta_2| > lambda^{d-1}`: `O(R^alpha)`.
    Power,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aperiodicity {
    Proven,
    Unverified,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectedSpectrum {
    /// `[re, im]`, in the canonical order.
    pub eigenvalues: Vec<[f64; 2]>,
    pub ell: usize,
    pub s: usize,
    pub alpha: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub system: SubstitutionSystem,
    pub expected: ExpectedSpectrum,
    pub regime: Regime,
    pub aperiodicity: Aperiodicity,
    pub note: &'static str,
    /// Test function used by default in deviation sweeps.
    pub default_f: CylFunction,
    /// Default `[R_min, R_max]` for deviation sweeps.
    pub default_range: (f64, f64),
}

impl CatalogEntry {
    /// Largest gap between the computed and stored spectral summaries.
    pub fn spectrum_mismatch(&self, spec: &SpectralData) -> f64 {
        if spec.m() != self.expected.eigenvalues.len()
            || spec.ell != self.expected.ell
            || spec.s != self.expected.s
        {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for (z, e) in spec.eigenvalues.iter().zip(&self.expected.eigenvalues) {
            worst = worst.max((z.re - e[0]).abs()).max((z.im - e[1]).abs());
        }
        match (spec.alpha(), self.expected.alpha) {
            (Some(a), Some(b)) => worst.max((a - b).abs()),
            (None, None) => worst,
            _ => f64::INFINITY,
        }
    }
}

fn seg(lo: f64, hi: f64) -> ConvexPiece {
    ConvexPiece::segment(lo, hi).expect("static geometry")
}

fn rect(x0: f64, y0: f64, w: f64, h: f64) -> ConvexPiece {
    ConvexPiece::polygon(vec![[x0, y0], [x0 + w, y0], [x0 + w, y0 + h], [x0, y0 + h]])
        .expect("static geometry")
}

fn proto(id: usize, pieces: Vec<ConvexPiece>) -> Prototile {
    Prototile::new(id, pieces).expect("static geometry")
}

fn p1(x: f64) -> Point {
    [x, 0.0]
}

fn fibonacci() -> (SubstitutionSystem, ExpectedSpectrum) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let digits = vec![
        vec![vec![p1(0.0)], vec![p1(0.0)]],
        vec![vec![p1(phi)], vec![]],
    ];
    let sys = SubstitutionSystem::new(
        "fibonacci",
        1,
        phi,
        vec![proto(1, vec![seg(0.0, phi)]), proto(2, vec![seg(0.0, 1.0)])],
        digits,
    )
    .expect("static system");
    let exp = ExpectedSpectrum {
        eigenvalues: vec![[phi, 0.0], [-1.0 / phi, 0.0]],
        ell: 1,
        s: 0,
        alpha: Some((1.0 / phi).ln() / phi.ln()),
    };
    (sys, exp)
}

fn nonpisot13() -> (SubstitutionSystem, ExpectedSpectrum) {
    let r13 = 13f64.sqrt();
    let lam = (1.0 + r13) / 2.0;
    // a -> a b b b, b -> a
    let digits = vec![
        vec![vec![p1(0.0)], vec![p1(0.0)]],
        vec![vec![p1(lam), p1(lam + 1.0), p1(lam + 2.0)], vec![]],
    ];
    let sys = SubstitutionSystem::new(
        "nonpisot13",
        1,
        lam,
        vec![proto(1, vec![seg(0.0, lam)]), proto(2, vec![seg(0.0, 1.0)])],
        digits,
    )
    .expect("static system");
    let t2 = (1.0 - r13) / 2.0;
    let exp = ExpectedSpectrum {
        eigenvalues: vec![[lam, 0.0], [t2, 0.0]],
        ell: 2,
        s: 0,
        alpha: Some(t2.abs().ln() / lam.ln()),
    };
    (sys, exp)
}

fn table2d() -> (SubstitutionSystem, ExpectedSpectrum) {
    let h = proto(1, vec![rect(0.0, 0.0, 2.0, 1.0)]);
    let v = proto(2, vec![rect(0.0, 0.0, 1.0, 2.0)]);
    let digits = vec![
        vec![vec![[1.0, 0.0], [1.0, 1.0]], vec![[0.0, 0.0], [0.0, 3.0]]],
        vec![vec![[0.0, 0.0], [3.0, 0.0]], vec![[0.0, 1.0], [1.0, 1.0]]],
    ];
    let sys = SubstitutionSystem::new("table2d", 2, 2.0, vec![h, v], digits).expect("static system");
    let exp = ExpectedSpectrum {
        eigenvalues: vec![[4.0, 0.0], [0.0, 0.0]],
        ell: 1,
        s: 0,
        alpha: None,
    };
    (sys, exp)
}

#[allow(clippy::needless_range_loop)]
fn chair() -> (SubstitutionSystem, ExpectedSpectrum) {
    // Species k is species 1 rotated by k quarter turns about (1, 1); a unit
    // square with lower-left corner (p, q) goes to (1 - q, p).
    let mut squares: Vec<Vec<Point>> = vec![vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]];
    for k in 1..4 {
        let prev = &squares[k - 1];
        squares.push(prev.iter().map(|s| [1.0 - s[1], s[0]]).collect());
    }
    let prototiles = squares
        .iter()
        .enumerate()
        .map(|(k, sq)| proto(k + 1, sq.iter().map(|s| rect(s[0], s[1], 1.0, 1.0)).collect()))
        .collect();
    // Image of species 1; the others follow by rotating about (2, 2), which
    // sends a child translation (a, b) to (2 - b, a) and species t to t + 1.
    let base: Vec<(usize, Point)> =
        vec![(0, [0.0, 0.0]), (0, [1.0, 1.0]), (1, [2.0, 0.0]), (3, [0.0, 2.0])];
    let mut digits = vec![vec![Vec::new(); 4]; 4];
    let mut image = base;
    for j in 0..4 {
        for (t, x) in &image {
            digits[*t][j].push(*x);
        }
        image = image.iter().map(|(t, x)| ((t + 1) % 4, [2.0 - x[1], x[0]])).collect();
    }
    let sys = SubstitutionSystem::new("chair", 2, 2.0, prototiles, digits).expect("static system");
    let exp = ExpectedSpectrum {
        eigenvalues: vec![[4.0, 0.0], [2.0, 0.0], [2.0, 0.0], [0.0, 0.0]],
        ell: 1,
        s: 1,
        alpha: Some(1.0),
    };
    (sys, exp)
}

fn bicolor3x3() -> (SubstitutionSystem, ExpectedSpectrum) {
    let sq = || vec![rect(0.0, 0.0, 1.0, 1.0)];
    let mut digits = vec![vec![Vec::new(); 2]; 2];
    for x in 0..3 {
        for y in 0..3 {
            let p = [x as f64, y as f64];
            let diagonal_corner = (x, y) == (0, 0) || (x, y) == (2, 2);
            let (a, b) = if diagonal_corner { (1, 0) } else { (0, 1) };
            digits[a][0].push(p);
            digits[b][1].push(p);
        }
    }
    let sys = SubstitutionSystem::new("bicolor3x3", 2, 3.0, vec![proto(1, sq()), proto(2, sq())], digits)
        .expect("static system");
    let exp = ExpectedSpectrum {
        eigenvalues: vec![[9.0, 0.0], [5.0, 0.0]],
        ell: 2,
        s: 0,
        alpha: Some(2.0 * 5f64.ln() / 9f64.ln()),
    };
    (sys, exp)
}

/// Looks up a built-in system by name and validates it.
pub fn builtin(name: &str) -> Result<CatalogEntry> {
    let (system, expected) = match name {
        "fibonacci" => fibonacci(),
        "nonpisot13" => nonpisot13(),
        "table2d" => table2d(),
        "chair" => chair(),
        "bicolor3x3" => bicolor3x3(),
        _ => return Err(Error::UnknownName(name.to_string())),
    };
    validate_system(&system, DEFAULT_TOL).into_result()?;
    let (regime, aperiodicity, note, c, range) = match name {
        "fibonacci" => (
            Regime::Bounded,
            Aperiodicity::Proven,
            "Fibonacci interval substitution a -> ab, b -> a",
            vec![1.0, 0.0],
            (1e2, 1e5),
        ),
        "nonpisot13" => (
            Regime::Power,
            Aperiodicity::Proven,
            "interval substitution a -> abbb, b -> a with non-Pisot dilation (1 + sqrt 13)/2",
            vec![1.0, 0.0],
            (1e2, 1e5),
        ),
        "table2d" => (
            Regime::Boundary,
            Aperiodicity::Proven,
            "domino table tiling, horizontal and vertical dominoes",
            vec![1.0, 0.0],
            (16.0, 2048.0),
        ),
        "chair" => (
            Regime::LogCorrected,
            Aperiodicity::Proven,
            "chair tiling, four rotation species of the L-tromino",
            vec![1.0, 0.0, -1.0, 0.0],
            (16.0, 2048.0),
        ),
        _ => (
            Regime::Power,
            Aperiodicity::Unverified,
            "two-colour 3x3 block substitution, minority colour on the main diagonal corners",
            vec![1.0, -1.0],
            (27.0, 2187.0),
        ),
    };
    Ok(CatalogEntry {
        system,
        expected,
        regime,
        aperiodicity,
        note,
        default_f: CylFunction::new(c),
        default_range: range,
    })
}

/// Spectral data of an entry in power mode.
pub fn spectral(entry: &CatalogEntry) -> Result<SpectralData> {
    SpectralData::from_system(&entry.system, SpectralMode::Power)
}
