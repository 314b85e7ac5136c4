//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by validation, linear algebra, and estimation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A series member does not have the common matrix shape.
    #[error("shape mismatch at t={index}: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        index: usize,
        expected: (usize, usize),
        found: (usize, usize),
    },

    /// A NaN or infinite entry; reports the first offending position.
    #[error("non-finite entry at (t={t}, i={row}, j={col})")]
    NonFinite { t: usize, row: usize, col: usize },

    /// Incompatible or invalid dimensions for an operation.
    #[error("dimension error: {0}")]
    Dim(String),

    /// Numerical rank below the requested number of columns.
    #[error("matrix is rank deficient")]
    RankDeficient,

    /// Input matrix is not symmetric within tolerance.
    #[error("matrix is not symmetric")]
    NotSymmetric,

    /// Eigenvalue iteration failed to converge (pathological input).
    #[error("eigenvalue iteration did not converge")]
    EigenNoConverge,

    /// Leading eigenvalue is not positive; eigenvalue ratios are undefined.
    #[error("leading eigenvalue is not positive")]
    ZeroMatrix,

    /// Median residual is numerically zero; Huber weights are undefined.
    #[error("degenerate tau: median residual below 1e-12")]
    DegenerateTau,

    /// Covariance matrix failed its Cholesky factorization.
    #[error("covariance matrix is not positive definite")]
    CovNotPd,

    /// Not enough observations for the requested rolling windows.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Invalid configuration value.
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
