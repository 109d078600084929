use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("arity mismatch: expected {expected} images, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("empty word not allowed here")]
    EmptyWord,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("check is undecidable here: {0}")]
    Undecidable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
