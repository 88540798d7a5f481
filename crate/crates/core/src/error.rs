use std::io;

use thiserror::Error;

/// Errors produced anywhere in the compression pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Box geometry that violates an arithmetic precondition.
    #[error("structural error: {0}")]
    Structural(String),

    /// A dataset invariant does not hold.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("size mismatch at level {level}, box {box_id}: expected {expected} values, found {found}")]
    SizeMismatch {
        level: usize,
        box_id: usize,
        expected: usize,
        found: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// Malformed or truncated compressed bytes.
    #[error("corrupt stream: {0}")]
    Corrupt(String),

    #[error("huffman decode failed at bit offset {bit_offset}: {reason}")]
    Decode { bit_offset: u64, reason: String },

    #[error("unknown lossless codec id {0}")]
    UnknownCodec(u8),

    #[error("missing fine coverage for level {level}, box {box_id}, cell {cell:?}")]
    MissingCoverage {
        level: usize,
        box_id: usize,
        cell: [i64; 3],
    },

    #[error("malformed header: {0}")]
    Header(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn corrupt(msg: impl Into<String>) -> Self {
        Error::Corrupt(msg.into())
    }
}
