use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("unknown operation `{0}`")]
    UnknownOp(String),
    #[error("operation `{op}` expects {expected} arguments, got {got}")]
    Arity { op: String, expected: usize, got: usize },
    #[error("state {state} out of range (carrier has {len} elements)")]
    StateOutOfRange { state: usize, len: usize },
    #[error("plug(context, value) does not equal the image of the given element")]
    PullbackMismatch,
    #[error("coalgebra is not thin")]
    NotThin,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("{stage}: state budget exceeded ({size} > {limit})")]
    Budget { stage: &'static str, size: usize, limit: usize },
    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },
    #[error("{pointer}: {msg}")]
    Document { pointer: String, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
