use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian: max asymmetry {asymmetry:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { asymmetry: f64, tol: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:.3e} below -{tol:.3e}")]
    NotPsd { eigenvalue: f64, tol: f64 },

    #[error("eigendecomposition failed to converge after {sweeps} sweeps")]
    EvdConvergence { sweeps: usize },

    #[error("diagonal offset {offset} out of range for {dim}x{dim} matrix")]
    DiagonalRange { offset: i64, dim: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
