use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("chart mismatch: expected {expected}, found {found}")]
    Chart { expected: String, found: String },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("loop is not closed (endpoint gap {0:.3e})")]
    OpenLoop(f64),
    #[error("loops cannot be composed: {0}")]
    Composition(String),
    #[error("connection components do not commute on the enclosed surface (max commutator norm {0:.3e})")]
    NotAbelian(f64),
    #[error("loop is not an axis-aligned rectangle")]
    Shape,
    #[error("requested area {requested} is out of reach (maximum {max})")]
    Range { requested: f64, max: f64 },
    #[error("index error: {0}")]
    Index(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
