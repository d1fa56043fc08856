use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("energy {energy} keV is outside the table range [{lo}, {hi}] keV")]
    EnergyOutOfRange { energy: f64, lo: f64, hi: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The input has too little spread for the requested statistic.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A template-matching entropy found no matching pairs.
    #[error("insufficient matches (A = {a}, B = {b})")]
    InsufficientMatches { a: u64, b: u64 },

    #[error("block {0} has no CTM value")]
    UnknownBlock(String),

    #[error("wrong geometry: {0}")]
    Geometry(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
