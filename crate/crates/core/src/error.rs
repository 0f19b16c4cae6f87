use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module.
///
/// Rejected inputs are caller mistakes (dimension mismatch, out-of-range
/// parameters, violated hypotheses). Numeric failures are conditions where
/// the input was acceptable but the computation could not meet its
/// tolerance.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    RejectedInput(String),
    #[error("numeric failure: {0}")]
    NumericFailure(String),
}

impl Error {
    pub(crate) fn rejected(msg: impl Into<String>) -> Self {
        Error::RejectedInput(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::NumericFailure(msg.into())
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NumericFailure(_))
    }
}
