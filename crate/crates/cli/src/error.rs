use thiserror::Error;

use triplet_core::Error as CoreError;

/// Failure of a command, carrying the exit status it maps to.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config or parameters, or an unusable output path. Exit 1.
    #[error("{0}")]
    Usage(String),
    /// A numerical step failed. Exit 2.
    #[error("{0}")]
    Numerical(String),
    /// The oracle ran but disagreed with the analytic spectrum. Exit 3.
    #[error("{0}")]
    OracleMismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::OracleMismatch(_) => 3,
        }
    }
}

fn is_usage(e: &CoreError) -> bool {
    match e {
        CoreError::InvalidParameter { .. }
        | CoreError::Config(_)
        | CoreError::SimConfig(_)
        | CoreError::Grid(_)
        | CoreError::Precondition(_)
        | CoreError::Io(_) => true,
        CoreError::AtFrequency { source, .. } => is_usage(source),
        _ => false,
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        if is_usage(&e) {
            CliError::Usage(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}
