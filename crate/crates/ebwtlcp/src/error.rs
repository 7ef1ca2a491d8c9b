//! Error types shared by every stage of the pipeline.

use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while ingesting, building or verifying.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("input contains no symbols")]
    EmptyInput,

    #[error("input collection contains no strings")]
    EmptyCollection,

    #[error("record {index} is an empty string; every string needs at least one symbol")]
    EmptyString { index: usize },

    #[error("alphabet has {count} distinct bytes; at most {max} are supported")]
    AlphabetTooLarge { count: usize, max: usize },

    #[error("end-marker byte {byte:#04x} occurs in the input data")]
    EndMarkerCollision { byte: u8 },

    #[error("byte {byte:#04x} is not part of the alphabet")]
    UnknownSymbol { byte: u8 },

    #[error("malformed {format} record near record {index}: {reason}")]
    MalformedRecord {
        format: &'static str,
        index: usize,
        reason: String,
    },

    #[error("index {index} out of range (limit {limit})")]
    OutOfRange { index: u64, limit: u64 },

    #[error("generation {requested} is not on disk (current generation: {current})")]
    MissingGeneration { requested: i64, current: i64 },

    #[error("tracker for string {string_id} points at position {position} past segment {segment} (length {length})")]
    InconsistentTracker {
        string_id: u32,
        segment: u8,
        position: u64,
        length: u64,
    },

    #[error("insert position {position} overruns segment {segment} while merging")]
    TrackerSegmentOverrun { segment: u8, position: u64 },

    #[error("malformed ebwt: {0}")]
    MalformedEbwt(String),

    #[error("missing metadata file {0}")]
    MissingMetadata(PathBuf),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
