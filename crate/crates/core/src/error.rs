use thiserror::Error;

/// Which network diagnostic a matrix failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkViolation {
    NotRowStochastic,
    NotStronglyConnected,
    Periodic,
}

impl std::fmt::Display for NetworkViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NetworkViolation::NotRowStochastic => write!(f, "row_stochastic"),
            NetworkViolation::NotStronglyConnected => write!(f, "strongly_connected"),
            NetworkViolation::Periodic => write!(f, "aperiodic"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid influence matrix: {0}")]
    InvalidMatrix(String),

    #[error("network precondition failed: {0} is false")]
    Network(NetworkViolation),

    #[error(
        "power iteration did not converge after {iterations} iterations (last delta {delta:e})"
    )]
    NotConverged { iterations: usize, delta: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by reading or writing files.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::Csv(e) => e.is_io_error(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
