use thiserror::Error;

/// Errors raised by the forecasting toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("query at {at} outside covered range [{lo}, {hi}]")]
    QueryOutOfRange { at: f64, lo: f64, hi: f64 },

    #[error("popularity is zero; log-scale quantities are undefined")]
    ZeroPopularity,

    #[error("event stream is empty")]
    EmptyStream,

    #[error("degenerate variance: {0}")]
    DegenerateVariance(&'static str),

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("series `{id}` does not cover age {age}")]
    CoverageGap { id: String, age: f64 },

    #[error("split produced an empty {0} set")]
    EmptySplit(&'static str),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("time {0} is not on the generator step grid")]
    OffGrid(f64),

    #[error("series `{0}` has a decreasing cumulative count")]
    NonMonotoneSeries(String),

    #[error("invalid series `{id}`: {reason}")]
    InvalidSeries { id: String, reason: String },

    #[error("duplicate submission id `{0}`")]
    DuplicateId(String),

    #[error("dataset is in {found} but {expected} is required")]
    WrongTimeUnit { expected: &'static str, found: &'static str },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("input is empty")]
    EmptyInput,

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
