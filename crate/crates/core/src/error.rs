use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("template error: {0}")]
    Template(String),
    #[error("invalid template: {}", .0.join("; "))]
    InvalidTemplate(Vec<String>),
    #[error("horizon exceeded: requested {requested}, exact up to {horizon}")]
    HorizonExceeded { requested: usize, horizon: usize },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("malformed arrangement: {0}")]
    MalformedArrangement(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("no bracket found: {0}")]
    BracketFailure(String),
    #[error("missing dependency: {0}")]
    MissingDependency(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that signal an exhausted resource budget.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::ResourceLimit(_) | Error::HorizonExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
