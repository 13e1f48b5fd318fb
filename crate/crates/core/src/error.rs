use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("incomparable lattices: {0}")]
    IncomparableLattices(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("not a subgroup: {0}")]
    NotASubgroup(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("cycle {0} does not divide the conductor radical")]
    NotADivisor(String),
    #[error("place {0} is ramified")]
    Ramified(String),
    #[error("rank deficiency: {0}")]
    RankDeficient(String),
    #[error("Stark element not recognized at this precision (rounding distance {distance})")]
    StarkNotRecognized { distance: String },
    #[error("validation failed [{invariant}]: {detail}")]
    Validation { invariant: String, detail: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(invariant: &str, detail: impl Into<String>) -> Self {
        Error::Validation {
            invariant: invariant.to_string(),
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
