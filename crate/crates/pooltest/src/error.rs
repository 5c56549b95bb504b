use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("self-loop at line {line}: vertex {vertex}")]
    SelfLoop { line: usize, vertex: u32 },

    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    #[error("occurrence cap of {cap} exceeded")]
    OccurrenceCap { cap: usize },

    #[error("index {index} out of range (m = {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("empty occurrence list")]
    EmptyOccurrenceList,

    #[error("identical occurrences: pair events are defined only for distinct copies")]
    IdenticalOccurrences,
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: 0,
            msg: format!("JSON: {e}"),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
