use thiserror::Error;

/// Errors produced by the sampler toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A state handed to a kernel lies outside the support of the target.
    #[error("state {0} is outside the support of the target")]
    OffSupport(String),

    /// A weight draw or a supplied weight was not strictly positive.
    #[error("weight must be strictly positive, got {0}")]
    NonPositiveWeight(f64),

    /// The requested operation needs something the model cannot provide,
    /// e.g. exact enumeration of an infinite-support weight family.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// Arguments violate an operation's preconditions.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A birth-death specification violates the positivity requirements.
    #[error("invalid birth-death specification: {0}")]
    InvalidSpec(String),

    /// The rate-bound precondition `log(2 R r log(1/tau)) >= 1` failed.
    #[error("inconclusive bound: {0}")]
    InconclusiveBound(String),

    /// Configuration could not be resolved; carries the failing key.
    #[error("invalid config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}
