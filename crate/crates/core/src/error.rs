use alloc::string::String;

/// Errors raised by the core engines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Argument outside the domain an operation is defined on.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Two operands disagree on the number of qubits.
    #[error("length mismatch: {left} vs {right} qubits")]
    LengthMismatch { left: usize, right: usize },
    /// An exhaustive enumeration or dense construction would exceed its guard.
    #[error("capacity guard exceeded: {what} needs {needed}, limit is {limit}")]
    Capacity {
        what: &'static str,
        needed: u64,
        limit: u64,
    },
    /// The requested combination is deliberately not supported by this engine.
    #[error("unsupported mode: {0}")]
    Unsupported(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
