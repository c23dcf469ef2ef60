//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("batch timestamp {got} does not advance past {last}")]
    StaleTimestamp { last: f64, got: f64 },

    #[error("timestamp {0} is not a finite number")]
    InvalidTimestamp(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot downsample from weight {from} to {to}")]
    TargetOutOfRange { from: f64, to: f64 },

    #[error("query time {query} precedes arrival time {arrival} or the last observed batch")]
    TimeOrdering { arrival: f64, query: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("empty sample: no training data is available")]
    EmptySample,

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("plan does not match reservoir state: {0}")]
    PlanMismatch(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
