use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("alphabet mismatch: expected t = {expected}, found t = {found}")]
    AlphabetMismatch { expected: u8, found: u8 },

    #[error("invalid word: {0}")]
    InvalidWord(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A search or enumeration would exceed its configured size cap.
    #[error("{what}: size {size} exceeds cap {cap}")]
    CapExceeded { what: String, size: u128, cap: u128 },

    #[error("conditions not satisfied: {0}")]
    ConditionsUnsatisfied(String),

    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn cap(what: impl Into<String>, size: u128, cap: u128) -> Self {
        Error::CapExceeded {
            what: what.into(),
            size,
            cap,
        }
    }
}
