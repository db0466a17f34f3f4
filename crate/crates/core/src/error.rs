use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A point, parameter or dataset violates the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid or missing configuration.
    #[error("config error: {0}")]
    Config(String),

    /// A sampler exceeded an engineering guard. The run is discarded rather
    /// than truncated, since truncation would bias the released value.
    #[error("sampler abort in {stage}: {reason}")]
    Abort { stage: &'static str, reason: String },

    /// A certified constant was contradicted at runtime.
    #[error("certification failure: {0}")]
    Certification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status for the command-line front end: 2 for bad input,
    /// 3 for sampler aborts and certification failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Config(_) | Error::Csv(_) => 2,
            Error::Abort { .. } | Error::Certification(_) => 3,
            Error::Io(_) | Error::Json(_) => 1,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn abort(stage: &'static str, reason: impl Into<String>) -> Self {
        Error::Abort {
            stage,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
