use thiserror::Error;

pub type Result<T> = std::result::Result<T, AoiError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AoiError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The inputs are well formed but the requested quantity does not exist
    /// for them (for example no update ever completes service).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// The simulator hit its event cap before the requested number of cycles.
    #[error("partial result: {completed} of {requested} cycles completed before the event cap")]
    PartialResult { completed: u64, requested: u64 },
}

impl AoiError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        AoiError::InvalidArgument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        AoiError::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        AoiError::Config(msg.into())
    }
}
