use std::fmt;

/// Failure of a CLI command, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration or arguments (exit 2).
    Validation(String),
    /// The numerics failed: non-convergence or a singular metric (exit 3).
    Numerical(String),
    /// Writing artifacts failed (exit 1).
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid configuration: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<clebsch::Error> for CliError {
    fn from(e: clebsch::Error) -> Self {
        match e {
            e if e.is_numerical() => CliError::Numerical(e.to_string()),
            clebsch::Error::Io(e) => CliError::Io(e.to_string()),
            e => CliError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
