use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An input violated an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),
    /// A finite carrier ran out before the requested construction completed.
    #[error("carrier exhausted: {0}")]
    CarrierExhausted(String),
    /// A G-operation set was not a Schreier set of even cardinality.
    #[error("not a Schreier set: {0}")]
    NotSchreier(String),
    /// The space contains a closure rule the engine cannot decide on its own.
    #[error("unsupported rule: {0}")]
    UnsupportedRule(String),
    /// A hard size limit was exceeded.
    #[error("limit exceeded: {0}")]
    LimitExceeded(String),
    /// A node path or a named item did not resolve.
    #[error("not found: {0}")]
    NotFound(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::CarrierExhausted(_) => "carrier-exhausted",
            Error::NotSchreier(_) => "not-schreier",
            Error::UnsupportedRule(_) => "unsupported-rule",
            Error::LimitExceeded(_) => "limit-exceeded",
            Error::NotFound(_) => "not-found",
            Error::Parse(_) => "parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
