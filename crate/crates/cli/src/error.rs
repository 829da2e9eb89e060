use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{0}")]
    Library(#[from] varlorentz::Error),

    #[error("check failed: {0}")]
    Check(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 0 success, 1 assertion or bound violation, 2 config error, 3 numeric or i/o failure.
    pub fn exit_code(&self) -> u8 {
        use varlorentz::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Check(_) => 1,
            CliError::Io(_) => 3,
            CliError::Library(e) => match e {
                E::IdentityViolation(_) | E::PropertyFailure { .. } | E::BoundViolation(_) => 1,
                E::InvalidArgument(_)
                | E::InvalidProfile(_)
                | E::InvalidExponent(_)
                | E::NonzeroBoundary(_)
                | E::JumpDiscontinuity(_)
                | E::ZeroGradient
                | E::Precondition(_) => 2,
                E::NoConvergence(_) => 3,
            },
        }
    }
}

/// Library errors raised while validating a config count as config errors.
pub fn as_config(e: varlorentz::Error) -> CliError {
    CliError::Config(e.to_string())
}
