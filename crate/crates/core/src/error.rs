use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Input violates a documented precondition; the caller can fix it.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Input could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
    /// An invariant that the mathematics guarantees did not hold.
    #[error("internal invariant failure: {0}")]
    Internal(String),
}

impl Error {
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Precondition(_) | Error::Parse(_) => 2,
            Error::Internal(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn pre<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}

pub(crate) fn internal<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Internal(msg.into()))
}
