use alloc::string::String;

/// Errors raised by the inference engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("all weights are zero")]
    ZeroWeights,

    #[error("all scales are zero; the distance would vanish identically")]
    ZeroScales,

    #[error("covariance matrix is singular after regularization")]
    SingularCovariance,

    #[error("importance density escaped the prior support ({0} consecutive rejections)")]
    SupportEscape(u64),

    #[error("importance density is zero at a point of positive prior density")]
    SupportViolation,

    #[error("model produced no complete simulation after {0} attempts")]
    NoCompleteSimulation(u64),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
