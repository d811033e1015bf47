use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("coordinate tie in coordinate {coord} at value {value}")]
    Tie { coord: usize, value: f64 },

    #[error("record set is empty")]
    EmptyRecordSet,

    #[error("generator set is empty")]
    EmptyGeneratorSet,

    #[error("empty support set")]
    EmptySupport,

    #[error("instance too large for brute-force enumeration: {0}")]
    InstanceTooLarge(String),

    #[error("quadrature did not converge: value {value}, error estimate {abs_error}")]
    QuadratureNonConvergence { value: f64, abs_error: f64 },

    #[error("n = {0} is too small for iterated logarithms (need n >= 16)")]
    TooSmallForIteratedLogs(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("summary shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("insufficient replications: have {have}, need {need}")]
    InsufficientReplications { have: u64, need: u64 },

    #[error("replication {rep}: {source}")]
    Replication {
        rep: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
