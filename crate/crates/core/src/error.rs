use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violates an operation's precondition.
    Argument(String),
    /// A spec refers to something that does not exist or is malformed.
    Config(String),
    /// A numerical routine failed to converge.
    Numerical(String),
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Argument(m) => write!(f, "invalid argument: {m}"),
            Error::Config(m) => write!(f, "configuration error: {m}"),
            Error::Numerical(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl core::error::Error for Error {}
