use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A computation needed eigenvalues beyond the table's truncation.
    #[error("insufficient spectrum `{label}`: need every eigenvalue up to {required}, table is complete only {available}")]
    InsufficientSpectrum {
        label: String,
        required: Scalar,
        available: String,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: spectrum invariant violated: {message}")]
    Invariant { line: usize, message: String },

    #[error("cylindrical regime (a = 0): use the ACyl windows instead")]
    CylindricalRegime,

    #[error("no verdict: hypothesis not met: {0}")]
    NoVerdict(String),

    #[error("grid too short: tail estimate {tail:e} exceeds tolerance {tolerance:e}")]
    GridTooShort { tail: f64, tolerance: f64 },

    #[error("ill-conditioned fit: condition number {0:e}")]
    IllConditioned(f64),

    #[error("degenerate seed data: {0}")]
    DegenerateSeed(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
