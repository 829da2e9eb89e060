use thiserror::Error;

/// Errors raised by the toolkit. Variants carry enough context to name the
/// failing precondition without a backtrace.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid exponent field: {0}")]
    InvalidExponent(String),

    #[error("profile has a nonzero boundary value {0}; not an element of W0^(1,p)")]
    NonzeroBoundary(f64),

    #[error("profile has a jump at radius {0}; its gradient is not p-integrable")]
    JumpDiscontinuity(f64),

    #[error("profile has zero gradient; quotient undefined")]
    ZeroGradient,

    #[error("root bracketing failed after {0} steps")]
    NoConvergence(usize),

    #[error("identity check failed: {0}")]
    IdentityViolation(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("function system property ({property}) failed at level {level}: {detail}")]
    PropertyFailure { property: u8, level: usize, detail: String },

    #[error("bound violated: {0}")]
    BoundViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
