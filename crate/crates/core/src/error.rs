use thiserror::Error;

/// Errors raised by operator construction and the numerical guards.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("entries contain NaN or infinity")]
    NonFinite,

    #[error("state is not normalized under the requested product: norm = {norm}")]
    NotNormalized { norm: f64 },

    #[error("spectrum is degenerate: eigenvalue gap {gap:.3e} below tolerance {tol:.3e}")]
    DegenerateSpectrum { gap: f64, tol: f64 },

    #[error("metric is not positive definite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("metric condition number {cond:.3e} exceeds cap {cap:.3e}")]
    IllConditionedMetric { cond: f64, cap: f64 },

    #[error("operator is not Hermitian: residual {residual:.3e}")]
    NotHermitian { residual: f64 },

    #[error("matrix exponential overflow guard: norm {norm:.3e} exceeds cap {cap:.3e}")]
    Overflow { norm: f64, cap: f64 },

    #[error("truncation too small for |z| = {z_abs}: minimal admissible dimension is {min_dim}")]
    TruncationTooSmall { z_abs: f64, min_dim: usize },

    #[error("bad coefficients: {0}")]
    BadCoefficients(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("linear algebra backend error: {0}")]
    Backend(#[from] ndarray_linalg::error::LinalgError),
}

pub type Result<T> = std::result::Result<T, Error>;
