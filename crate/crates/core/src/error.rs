use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("sample point {value} (index {index}) is covered by no component support")]
    UncoveredPoint { index: usize, value: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("instance too large for exhaustive search: n = {n} exceeds cap {cap}; use mle_multistart")]
    InstanceTooLarge { n: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
