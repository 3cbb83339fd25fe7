use thiserror::Error;

/// Errors surfaced by the command-line front end. Each maps to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unknown component names, inconsistent configuration.
    #[error("{0}")]
    Usage(String),

    /// Input data that cannot be interpreted (malformed CSV, too few horizons).
    #[error("{0}")]
    Input(String),

    #[error("I/O error: {0}")]
    Io(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Core(#[from] cadf_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) | CliError::Core(_) => 1,
            CliError::Verification(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub(crate) fn io(context: impl std::fmt::Display, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{context}: {err}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
