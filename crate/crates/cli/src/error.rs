use std::fmt;
use std::path::Path;

/// Failure of a command, mapped onto the process exit status.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Validation(String),
    Verification(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Verification(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<su11_core::Error> for CliError {
    fn from(e: su11_core::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
