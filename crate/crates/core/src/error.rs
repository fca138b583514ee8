use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("point at distance {distance:.3e} from the boundary is outside the tube of reach {reach:.3e}")]
    OutOfTube { distance: f64, reach: f64 },

    #[error("radius {s} is outside the validity radius {rho}")]
    OutOfValidity { s: f64, rho: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid field family: {0}")]
    InvalidFamily(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_mismatch(expected: usize, got: usize) -> Error {
    Error::InvalidInput(format!("dimension mismatch: expected {expected}, got {got}"))
}
