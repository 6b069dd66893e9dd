use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("zero dimension")]
    ZeroDimension,

    #[error("values are not strictly increasing at index {index}")]
    NotOrdered { index: usize },

    #[error("coincident points at index {index}")]
    Coincident { index: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("iteration failed to converge: {0}")]
    Convergence(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Validation-type errors map to exit status 1, numerical failures to 2.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Convergence(_) | Error::Numerical(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
