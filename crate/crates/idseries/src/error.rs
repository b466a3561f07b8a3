//! Library error type with a stable machine-readable (module, code) pair.

use std::fmt;

/// Error raised by any module, carrying the originating module name, a short
/// stable code, and a human-readable detail string. Display renders as
/// `<module>:<code>: <detail>`, which the CLI prefixes with `ERROR:`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Error {
    pub module: &'static str,
    pub code: &'static str,
    pub detail: String,
}

impl Error {
    pub fn new(module: &'static str, code: &'static str, detail: impl Into<String>) -> Self {
        Error { module, code, detail: detail.into() }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.module, self.code, self.detail)
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
