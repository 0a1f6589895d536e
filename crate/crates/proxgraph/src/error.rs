use std::io;

/// Errors surfaced by every fallible operation in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid argument or violated precondition.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// Malformed container (bad header, inconsistent record dimensions).
    #[error("format error: {0}")]
    Format(String),
    /// Values that parse but are unusable (NaN, infinities).
    #[error("data error: {0}")]
    Data(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) => 2,
            Error::Io(_) | Error::Csv(_) => 3,
            Error::Format(_) | Error::Data(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
