use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("state is not on the unit simplex: {0}")]
    NotOnSimplex(String),

    #[error("eigenvalue iteration did not converge for a {dim}x{dim} matrix")]
    EigenFailure { dim: usize },

    #[error("degenerate normal form: cubic coefficient vanishes at mu = {mu_star}")]
    DegenerateNormalForm { mu_star: f64 },

    #[error("target {index} coincides with the observer position")]
    CoincidentTarget { index: usize },

    #[error("invalid config {path}: {reason}")]
    Config { path: PathBuf, reason: String },

    #[error("unknown controller `{0}`")]
    UnknownController(String),

    #[error("malformed csv: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
