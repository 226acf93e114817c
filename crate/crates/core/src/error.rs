use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model ({} violation(s)): {}", .0.len(), summarize(.0))]
    InvalidModel(Vec<Violation>),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state index {index} out of range for {r_max} configurational states")]
    IndexOutOfRange { index: usize, r_max: usize },

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("generator null space has dimension {nullity}, expected 1 (disconnected configurational space?)")]
    NullSpaceDegenerate { nullity: usize },

    #[error("steady state block {block} has eigenvalue {eigenvalue:e} below positivity tolerance")]
    NotPositive { block: usize, eigenvalue: f64 },

    #[error("shift u = {re:e}{im:+e}i lies on the generator spectrum (relative residual {residual:e})")]
    SingularShift { re: f64, im: f64, residual: f64 },

    #[error("stationary intensity {0:e} is zero")]
    ZeroIntensity(f64),

    #[error("mean photon count {0:e} is zero")]
    ZeroCounts(f64),

    #[error("grid is not strictly increasing at index {0}")]
    InvalidGrid(usize),

    #[error("Laurent coefficient check failed: {0}")]
    LaurentMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable identifier used by the command line front end for machine-readable errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidModel(_) => "InvalidModel",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::NegativeTime(_) => "NegativeTime",
            Error::NonFinite(_) => "NonFinite",
            Error::NullSpaceDegenerate { .. } => "NullSpaceDegenerate",
            Error::NotPositive { .. } => "NotPositive",
            Error::SingularShift { .. } => "SingularShift",
            Error::ZeroIntensity(_) => "ZeroIntensity",
            Error::ZeroCounts(_) => "ZeroCounts",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::LaurentMismatch(_) => "LaurentMismatch",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}

fn summarize(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
