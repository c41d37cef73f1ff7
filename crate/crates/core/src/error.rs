use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("arithmetic error: {0}")]
    Arithmetic(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("enumeration budget exceeded: need {needed} candidates, budget is {budget}")]
    Budget { needed: u128, budget: u128 },
    #[error("internal consistency error: {0}")]
    Internal(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("malformed file {path}: {msg}")]
    Format { path: String, msg: String },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }

    pub(crate) fn format(path: impl AsRef<std::path::Path>, msg: impl ToString) -> Self {
        Error::Format { path: path.as_ref().display().to_string(), msg: msg.to_string() }
    }

    /// Whether the error came from the file system rather than from bad input.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
