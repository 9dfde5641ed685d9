use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration, flags or input files.
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Input {
        path: PathBuf,
        source: zcoupling::Error,
    },

    #[error(transparent)]
    Compute(#[from] zcoupling::Error),

    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input { .. } => 2,
            CliError::Compute(_) | CliError::Output { .. } => 1,
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub type CliResult<T> = Result<T, CliError>;
