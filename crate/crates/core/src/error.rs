use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("integer overflow computing {what}")]
    Overflow { what: String },

    #[error("empty modulation set")]
    EmptyLambda,

    #[error("block k={k} needs path length at least {needed}, have {available}")]
    BlockOutOfRange { k: u32, needed: usize, available: usize },

    #[error("kernel kind {kind} needs a selector path")]
    MissingPath { kind: &'static str },

    #[error("truncation {m_max} is not a hitting time; unmatched tail mass {tail_mass:e}")]
    TruncationMismatch { m_max: usize, tail_mass: f64 },

    #[error("invalid sparse collection: {0}")]
    InvalidSparse(String),

    #[error("nonpositive weight value {value} at {position}")]
    NonPositiveWeight { position: i64, value: f64 },

    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
