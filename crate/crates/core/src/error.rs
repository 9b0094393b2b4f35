use thiserror::Error;

use crate::validate::Rejection;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("system rejected: {}", join_codes(.0))]
    Rejected(Vec<Rejection>),
    #[error("malformed system definition: {0}")]
    Malformed(String),
    #[error("patch would contain {count} tiles, cap is {cap}")]
    BudgetExceeded { count: u128, cap: u128 },
    #[error("no self-reproducing seed found up to power {max_power}")]
    NoSeed { max_power: u32 },
    #[error("domain is not contained in the covered region of the view (raise the depth)")]
    OutOfRegion,
    #[error("spectral gap too small: |theta1| - |theta2| = {gap:e}")]
    SpectralGapFail { gap: f64 },
    #[error("leading eigenvalue {theta1} does not match lambda^d = {expected}")]
    LambdaMismatch { theta1: f64, expected: f64 },
    #[error("Jordan block of size {size} inside the rapidly expanding subspace")]
    DefectiveEpp { size: usize },
    #[error("negative power requested for a vector with components outside the expanding subspace")]
    NegativePowerOutsideEpp,
    #[error("vector is not in the rapidly expanding subspace")]
    NotInEpp,
    #[error("unknown catalog entry `{0}`")]
    UnknownName(String),
    #[error("degenerate fit: only {usable} usable rows")]
    DegenerateFit { usable: usize },
    #[error("limit-law hypotheses fail: {0}")]
    HypothesesFail(String),
    #[error("beta(f) vanishes")]
    BetaZero,
    #[error("test function has nonzero mean {0}")]
    MeanNonzero(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable code, used in reports and CLI output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Rejected(_) => "REJECTED",
            Error::Malformed(_) => "MALFORMED",
            Error::BudgetExceeded { .. } => "BUDGET_EXCEEDED",
            Error::NoSeed { .. } => "NO_SEED",
            Error::OutOfRegion => "OUT_OF_REGION",
            Error::SpectralGapFail { .. } => "SPECTRAL_GAP_FAIL",
            Error::LambdaMismatch { .. } => "LAMBDA_MISMATCH",
            Error::DefectiveEpp { .. } => "DEFECTIVE_EPP",
            Error::NegativePowerOutsideEpp => "NEGATIVE_POWER_OUTSIDE_EPP",
            Error::NotInEpp => "NOT_IN_EPP",
            Error::UnknownName(_) => "UNKNOWN_NAME",
            Error::DegenerateFit { .. } => "DEGENERATE_FIT",
            Error::HypothesesFail(_) => "HYPOTHESES_FAIL",
            Error::BetaZero => "BETA_ZERO",
            Error::MeanNonzero(_) => "MEAN_NONZERO",
            Error::InvalidArgument(_) => "INVALID_ARGUMENT",
            Error::Json(_) => "JSON",
            Error::Io(_) => "IO",
        }
    }
}

fn join_codes(r: &[Rejection]) -> String {
    r.iter().map(|x| x.code()).collect::<Vec<_>>().join(", ")
}
