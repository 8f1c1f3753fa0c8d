use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] cbi_core::Error),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
    #[error("output: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    OracleFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        let code = match self {
            CliError::Core(e) if e.is_pk_violation() => 2,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::OracleFailed(_) => 3,
            _ => 1,
        };
        ExitCode::from(code)
    }
}
