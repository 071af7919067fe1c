use thiserror::Error;

use sle_lab_core::Error as CoreError;

/// Process exit statuses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitCode {
    Ok = 0,
    Failure = 1,
    Tolerance = 2,
    Config = 3,
    Budget = 4,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: CoreError,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn core(context: impl Into<String>, source: CoreError) -> Self {
        match source {
            CoreError::Budget { .. } | CoreError::SizeCap { .. } | CoreError::StepCap { .. } => {
                CliError::Budget(format!("{}: {source}", context.into()))
            }
            source => CliError::Core {
                context: context.into(),
                source,
            },
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::Config,
            CliError::Budget(_) => ExitCode::Budget,
            CliError::Core { source, .. } => match source {
                CoreError::Convergence(_) | CoreError::Singular => ExitCode::Failure,
                _ => ExitCode::Config,
            },
            CliError::Io(_) => ExitCode::Failure,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Attaches a context string to core results.
pub trait Context<T> {
    fn context(self, what: &str) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, CoreError> {
    fn context(self, what: &str) -> Result<T, CliError> {
        self.map_err(|e| CliError::core(what, e))
    }
}
