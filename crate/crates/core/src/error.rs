use thiserror::Error;

/// Errors raised by field construction and the operations built on top of it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A size or degree outside the supported range, or a theorem hypothesis
    /// (such as `n >= 4`) that does not hold.
    #[error("out of range: {0}")]
    Range(String),
    /// A modulus that does not define a field.
    #[error("cannot construct field: {0}")]
    Construction(String),
    /// An argument excluded by the operation's contract.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// Malformed textual input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
