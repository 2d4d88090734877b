use thiserror::Error;

/// Errors raised by the library. Each variant maps onto one CLI exit code
/// class (see [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    /// A rejected instance or an invalid experiment configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Caller broke an operation's contract (dimension mismatch, wrong
    /// operator kind, window too large, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// An iterate became non-finite or exceeded the divergence threshold.
    #[error("divergence at iterate {index}")]
    Divergence { index: i64 },

    /// `I - eta A^t + C^t` was numerically singular during the backward pass.
    #[error("singular step matrix at t = {step} (condition estimate {condition:.3e})")]
    Singular { step: i64, condition: f64 },

    /// A series or eigenvalue iteration failed to converge.
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// The exact total gap is only available for own-affine costs.
    #[error("unsupported instance: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("invalid config JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Exit code used by the CLI: 2 for configuration problems, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) | Error::Contract(_) | Error::Unsupported(_) => 2,
            Error::Io(_) => 2,
            Error::Divergence { .. } | Error::Singular { .. } | Error::Numeric(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Contract(format!(
            "{what}: expected dimension {expected}, got {got}"
        )));
    }
    Ok(())
}
