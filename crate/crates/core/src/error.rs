use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("progression length k={0} is not supported (need k >= 3)")]
    InvalidLength(usize),

    #[error("element {element} is not in {group}")]
    ElementOutOfRange { element: usize, group: String },

    #[error("coloring is not exact: {0}")]
    NotExact(String),

    #[error("coloring has {got} entries but the group has order {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("prime {p} is beyond the classification limit {limit}")]
    Unclassified { p: u64, limit: u64 },

    #[error("solver timed out after {nodes} nodes")]
    Timeout { nodes: u64 },

    #[error("instance too large for the exact solver: {0}")]
    TooLarge(String),

    #[error("store integrity error: {0}")]
    Integrity(String),

    #[error("corrupted store line {line} in {path}: {message}")]
    CorruptRecord {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
