use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AbError {
    #[error("series with zero constant term is not a unit")]
    NotAUnit,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("element does not belong to this module (expected rank {expected}, got {got})")]
    HostMismatch { expected: usize, got: usize },
    #[error("sub-module is not normal")]
    NotNormal,
    #[error("sub-module is not stable under a")]
    NotAStable,
    #[error("module is not regular: saturation did not stabilize after {iterations} iterations (heuristic cap)")]
    NotRegular { iterations: usize },
    #[error("module is not geometric: {0}")]
    NotGeometric(String),
    #[error("alpha must lie in (0, 1], got {0}")]
    BadAlpha(String),
    #[error("a-degree {degree} exceeds bound {bound}")]
    ADegreeOverflow { degree: usize, bound: usize },
    #[error("no embedding found for N in 0..={max_n} and dim V in 1..={max_dim}")]
    NoEmbeddingFound { max_n: usize, max_dim: usize },
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("unknown name `{name}` at line {line}")]
    UnknownName { line: usize, name: String },
    #[error("duplicate name `{name}` at line {line}")]
    DuplicateName { line: usize, name: String },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, AbError>;

pub(crate) fn exhausted(msg: impl Into<String>) -> AbError {
    AbError::PrecisionExhausted(msg.into())
}
