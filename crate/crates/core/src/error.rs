use thiserror::Error;

/// Errors produced by the estimators and their supporting numerics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed input (bad parameter combination, non-symmetric matrix, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A model evaluation or matrix entry was NaN or infinite.
    #[error("non-finite value in {context} at input index {index}")]
    NonFinite { context: &'static str, index: usize },

    /// Every eigenvalue is zero, so normalized spectrum quantities are undefined.
    #[error("degenerate spectrum: all eigenvalues are zero")]
    DegenerateSpectrum,

    /// The sample variance of the model output is zero; ratio indices are undefined.
    #[error("model output has zero variance")]
    ZeroVariance,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    NotConverged { sweeps: usize },

    /// The finite-slope operator could not draw a replacement coordinate far
    /// enough from the base point.
    #[error("could not resample coordinate {index} away from the base point")]
    ResampleExhausted { index: usize },

    /// Fewer replicates than batches; batch-means standard errors are unavailable.
    #[error("need at least {needed} replicates for standard errors, got {got}")]
    TooFewReplicates { needed: usize, got: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
