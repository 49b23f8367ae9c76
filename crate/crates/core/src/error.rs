use thiserror::Error;

/// Error type shared by every module of the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The problem size exceeds what the brute-force routines support.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// A numerical routine produced a non-finite value or failed to converge.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// Structurally valid input for which the requested quantity is undefined
    /// (for example a rate estimate from a run with an empty error sample).
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }
}
