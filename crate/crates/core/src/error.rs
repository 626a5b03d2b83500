use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet size must be at least 2, got {0}")]
    InvalidAlphabet(usize),

    #[error("alphabet mismatch: {left} vs {right} symbols")]
    AlphabetMismatch { left: usize, right: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("distribution is not full support")]
    NotFullSupport,

    #[error("mixture weights must sum to a positive total")]
    ZeroWeight,

    #[error("type vector is empty (n = 0)")]
    EmptyType,

    #[error("symbol {symbol} out of range for alphabet of size {size}")]
    SymbolOutOfRange { symbol: usize, size: usize },

    #[error("invalid hypothesis space: M = {m}, K = {k} (need M >= 3 and 1 <= K < M/2)")]
    InvalidSpace { m: usize, k: usize },

    #[error("invalid hypothesis: {0}")]
    InvalidHypothesis(String),

    #[error("score table is empty")]
    EmptyScores,

    #[error("score table contains NaN")]
    NanScore,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("observation source exhausted after {0} steps")]
    SourceExhausted(u64),

    #[error("data error{}: {msg}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Data { line: Option<usize>, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn data(line: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Data {
            line,
            msg: msg.into(),
        }
    }

    /// True for errors caused by malformed input data rather than configuration.
    pub fn is_data_error(&self) -> bool {
        matches!(self, Error::Data { .. } | Error::Csv(_) | Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
