use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Evaluation point outside the function's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Hölder metadata must be supplied by the caller for this kernel family.
    #[error("metadata required: {0}")]
    MetadataRequired(String),

    /// The computation left the range where double precision is trustworthy.
    #[error("numeric range: {0}")]
    NumericRange(String),

    #[error("simulation error: {0}")]
    Simulation(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::NumericRange(msg.into())
    }
}
