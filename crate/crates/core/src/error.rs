use thiserror::Error;

pub type Result<T> = std::result::Result<T, ConeError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{operation} is not supported for {variant}")]
    Unsupported {
        operation: &'static str,
        variant: String,
    },

    #[error("dual unavailable for {0}; use a sampled polar approximation")]
    DualUnavailable(String),

    #[error("point is not rescalable onto the slice: <e, x> = {pairing}")]
    NotRescalable { pairing: f64 },

    /// Iterative projection stopped at `max_iter`; carries the best iterate.
    #[error("no convergence after {iterations} iterations (gap {gap:e})")]
    NonConvergence {
        iterations: usize,
        gap: f64,
        best: Vec<f64>,
    },

    #[error("invalid cone specification: {0}")]
    InvalidSpec(String),

    #[error("region does not meet the affine hull of the face")]
    EmptyRegion,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("conjugate faces do not separate the generators: {0}")]
    NotSeparable(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(ConeError::DimensionMismatch { expected, found })
    }
}
