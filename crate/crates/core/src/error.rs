use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid symbol {symbol:?} in read {read} at offset {offset}")]
    InvalidSymbol { symbol: char, read: usize, offset: usize },

    #[error("invalid symbol code {0} for this alphabet")]
    InvalidCode(u8),

    #[error("packed unit {unit} out of range for scheme (max {max})")]
    CorruptUnit { unit: u16, max: u32 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("read {read} has length {len}, expected {expected}")]
    LengthMismatch { read: usize, len: usize, expected: usize },

    #[error("read length {0} exceeds the supported maximum of 65535")]
    ReadTooLong(usize),

    #[error("input contains no reads")]
    EmptyInput,

    #[error("sparsity {0} is not supported (expected 1..=6)")]
    IncompatibleSparsity(u8),

    #[error("pattern of length {k} is shorter than sparsity {s}")]
    PatternTooShort { k: usize, s: usize },

    #[error("position {start}+{k} exceeds read length {m}")]
    PositionOutOfRange { start: usize, k: usize, m: usize },

    #[error("unknown read id {0}")]
    UnknownReadId(u64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("bad magic: not an index file")]
    BadMagic,

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),

    #[error("section length mismatch: {0}")]
    SectionLengthMismatch(String),

    #[error("checksum mismatch: stored {stored:#018x}, computed {computed:#018x}")]
    ChecksumMismatch { stored: u64, computed: u64 },

    #[error("index invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// True for errors raised by a broken internal invariant rather than bad
    /// input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }

    /// Stable snake_case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSymbol { .. } => "invalid_symbol",
            Error::InvalidCode(_) => "invalid_code",
            Error::CorruptUnit { .. } => "corrupt_unit",
            Error::Parse { .. } => "parse",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::ReadTooLong(_) => "read_too_long",
            Error::EmptyInput => "empty_input",
            Error::IncompatibleSparsity(_) => "incompatible_sparsity",
            Error::PatternTooShort { .. } => "pattern_too_short",
            Error::PositionOutOfRange { .. } => "position_out_of_range",
            Error::UnknownReadId(_) => "unknown_read_id",
            Error::Config(_) => "config",
            Error::BadMagic => "bad_magic",
            Error::UnsupportedVersion(_) => "unsupported_version",
            Error::SectionLengthMismatch(_) => "section_length_mismatch",
            Error::ChecksumMismatch { .. } => "checksum_mismatch",
            Error::Invariant(_) => "invariant",
            Error::Io(_) => "io",
        }
    }
}
