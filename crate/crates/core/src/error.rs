use thiserror::Error;

/// Errors produced by the library operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty axis section along axis {axis}")]
    EmptySection { axis: usize },
    #[error("invalid body: {0}")]
    InvalidBody(String),
    #[error("unsupported body kind for {op}: {kind}")]
    UnsupportedKind { op: &'static str, kind: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("iteration did not converge: {0}")]
    NonConvergence(String),
    #[error("config error at key `{key}`: {msg}")]
    Config { key: String, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
