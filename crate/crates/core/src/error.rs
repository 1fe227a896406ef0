use thiserror::Error;

/// Failure modes shared by every module of the engine.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A mathematical precondition does not hold (non-harmonic base point,
    /// degenerate Hessian, non-derivation, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A truncated computation exceeded the term-count guard.
    #[error("resource error: {0}")]
    Resource(String),
    /// Malformed serialized input.
    #[error("format error: {0}")]
    Format(String),
    /// An identity that must hold by construction failed.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }
    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
