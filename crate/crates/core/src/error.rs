use thiserror::Error;

/// Error type shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector had the wrong length for the measure's ambient dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Invalid argument (nonpositive scale, empty list, weight sum off, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An iterative solver failed to converge or produced an unusable result.
    #[error("solver error: {0}")]
    Solver(String),

    /// A quadrature rule could not reach the requested tolerance.
    #[error("quadrature error: {0}")]
    Quadrature(String),

    /// Measure file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn solver(msg: impl Into<String>) -> Self {
        Error::Solver(msg.into())
    }
}
