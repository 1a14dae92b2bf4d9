use thiserror::Error;

/// Errors raised by the library.
///
/// Every variant maps onto a stable category string (see [`Error::category`])
/// that the command-line front end prints on the diagnostic stream.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),
    /// Inputs for which the requested quantity is undefined.
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// Finite noise table whose second moment is not one.
    #[error("non-normalized noise: {0}")]
    NonNormalizedNoise(String),
    /// Malformed noise table, codebook name, or similar configuration.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// Parameter combination the library does not cover.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A resource guard refused the request.
    #[error("guard: {0}")]
    Guard(String),
    /// Vector or matrix dimensions disagree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

impl Error {
    pub fn category(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Degenerate(_) => "degenerate",
            Error::NonNormalizedNoise(_) => "non-normalized-noise",
            Error::Config(_) => "config",
            Error::Unsupported(_) => "unsupported",
            Error::Guard(_) => "guard",
            Error::Dimension(_) => "dimension",
        }
    }

    /// The message without the category prefix.
    pub fn message(&self) -> &str {
        match self {
            Error::Domain(m)
            | Error::Degenerate(m)
            | Error::NonNormalizedNoise(m)
            | Error::Config(m)
            | Error::Unsupported(m)
            | Error::Guard(m)
            | Error::Dimension(m) => m,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
