use ancilla::io::IoError;
use ancilla::Error;

/// Failures that end a command before a report is produced.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or input files. Exit code 2.
    Usage(String),
    /// An input failed a mathematical precondition (e.g. not CP). Exit code 1.
    Verification(String),
    /// The numerics broke down. Exit code 3.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotCompletelyPositive { .. }
            | Error::NotCorrelationMatrix { .. }
            | Error::NotUcpt
            | Error::NotTracePreserving { .. }
            | Error::NotUnital { .. }
            | Error::NonCommutingPvms { .. } => CliError::Verification(e.to_string()),
            Error::Numerical(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Usage(e.to_string())
    }
}
