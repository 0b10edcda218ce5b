use std::io;

use crate::transport::Tag;

/// Errors surfaced by the screening protocols and their plumbing.
#[derive(Debug, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("share kind or party mismatch: {0}")]
    ShareMismatch(&'static str),
    #[error("triple pool exhausted: requested {requested}, available {available}")]
    TriplesExhausted { requested: usize, available: usize },
    #[error("oblivious transfer failed: {0}")]
    Ot(String),
    #[error("malformed group element in base OT")]
    MalformedPoint,
    #[error("insufficient base OTs for extension: need {needed}, have {have}")]
    InsufficientBaseOts { needed: usize, have: usize },
    #[error("cuckoo insertion exceeded eviction limit after {retries} retries")]
    InsertionFailure { retries: u32 },
    #[error("record {0} has no source bin in the extended permutation")]
    UnmappedRecord(usize),
    #[error("not a permutation: {0}")]
    NotBijective(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("attribute value contains the reserved separator")]
    ReservedSeparator,
    #[error("empty q-gram set")]
    EmptyGrams,
    #[error("handshake failed: {0}")]
    Handshake(String),
    #[error("unexpected frame: expected {expected:?}, got {actual:?}")]
    UnexpectedFrame { expected: Tag, actual: Tag },
    #[error("unknown frame tag 0x{0:02x}")]
    UnknownTag(u8),
    #[error("frame of {0} bytes exceeds the frame cap")]
    OversizeFrame(usize),
    #[error("stream truncated")]
    Truncated,
    #[error("frame received before handshake completion")]
    NoHandshake,
    #[error("session id mismatch: expected {expected}, got {actual}")]
    SessionMismatch { expected: u16, actual: u16 },
    #[error("session not finished")]
    Unfinished,
    #[error("literal calibration sum requested for {0} attributes (max 30)")]
    CalibrationTooLarge(usize),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
