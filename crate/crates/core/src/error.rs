use thiserror::Error;

/// Errors raised by stream construction, arithmetic and network evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid LFSR state: {0}")]
    InvalidState(String),

    #[error("value {value} outside domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("stream length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("format mismatch: {0}")]
    FormatMismatch(String),

    #[error("element {value} at index {index} outside range [{lo}, {hi}]")]
    ElementRange {
        index: usize,
        value: i64,
        lo: i64,
        hi: i64,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("training diverged at epoch {epoch}: {detail}")]
    Divergence { epoch: usize, detail: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
