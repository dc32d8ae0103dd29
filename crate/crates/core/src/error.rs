use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid deletion pattern: {0}")]
    InvalidPattern(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("symbol {symbol} outside [1, {k}]")]
    SymbolOutOfRange { symbol: u32, k: u32 },

    #[error("index {index} outside [1, {len}]")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("full-scale parameters not executable: {0}")]
    FullScale(String),

    #[error("enumeration limit exceeded: {count} items > limit {limit}")]
    EnumerationLimit { count: u128, limit: u128 },

    #[error("only {found} admissible inner patterns, need {needed}")]
    InsufficientAdmissible { found: usize, needed: usize },

    #[error("inner pattern at block {block} corrupts {corrupted} codewords, more than {allowed}")]
    TooManyCorrupted {
        block: usize,
        corrupted: usize,
        allowed: usize,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("word is not a codeword of the given code")]
    NotInCode,

    #[error("inconsistent pairing table: {0}")]
    InconsistentPairs(String),

    #[error("insufficient codewords: have {have}, need {need}")]
    InsufficientCodewords { have: usize, need: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
