use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("goal generation failed: {0}")]
    GenerationFailure(String),

    #[error("environment setup failed: {0}")]
    EnvironmentSetup(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("invalid model spec: {0}")]
    Spec(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("non-finite loss at training step {step}")]
    Numeric { step: u64 },

    #[error("checkpoint format error: {0}")]
    Format(String),

    #[error("cannot sample: {0}")]
    Sampling(String),

    #[error("invalid goal: {0}")]
    InvalidGoal(String),

    #[error("entropy undefined for an empty distribution")]
    UndefinedEntropy,

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("config error in field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("run aborted at epoch {epoch}: {source}")]
    Epoch {
        epoch: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(context: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.to_string(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors that come from a diverging network rather than bad input.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Numeric { .. } => true,
            Error::Epoch { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}
