use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Inconsistent network geometry, mismatched dimensions, bad config file.
    #[error("configuration error: {0}")]
    Config(String),

    /// Arguments outside the domain where a formula is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative factorization did not converge.
    #[error("factorization failed: {0}")]
    Factorization(String),

    /// Input violates an operation's contract (e.g. a non-Hermitian matrix passed to an
    /// Hermitian eigensolver).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// A numerical verification found a dimension different from the predicted one.
    #[error(
        "verification failed for tuple {tuple:?}: expected dimension {expected}, found {found}"
    )]
    VerificationFailure {
        tuple: Vec<usize>,
        expected: usize,
        found: usize,
    },

    /// A numerical quantity that must be usable (e.g. a noise covariance) was singular.
    #[error("numerics error: {0}")]
    Numerics(String),

    /// A run would exceed a configured resource cap.
    #[error("truncated: {0}")]
    Truncated(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
