use std::path::PathBuf;

use autores_core::integrate::IntegrateError;
use autores_core::ModelError;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Usage(#[from] clap::Error),

    #[error("{0}")]
    BadInput(String),

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error(transparent)]
    Integration(#[from] IntegrateError),

    #[error("{0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Machine-readable form printed to stderr on failure.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub error: &'static str,
    pub exit_code: i32,
    pub message: String,
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) | CliError::BadInput(_) => "usage",
            CliError::Model(ModelError::DegeneratePumping { .. }) => "degenerate_pumping",
            CliError::Model(ModelError::NonPositiveLambda { .. }) => "non_positive_lambda",
            CliError::Model(ModelError::BranchAbsent { .. }) => "branch_absent",
            CliError::Model(_) => "model",
            CliError::Integration(IntegrateError::InvalidConfig(_)) => "usage",
            CliError::Integration(_) | CliError::Numerical(_) => "numerical",
            CliError::Io { .. } => "io",
        }
    }

    /// 1 usage, 2 model or domain, 3 numerical failure, 4 file system.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) if !e.use_stderr() => 0,
            CliError::Usage(_) | CliError::BadInput(_) => 1,
            CliError::Model(_) => 2,
            CliError::Integration(IntegrateError::InvalidConfig(_)) => 1,
            CliError::Integration(_) | CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn report(&self) -> ErrorReport {
        ErrorReport {
            error: self.kind(),
            exit_code: self.exit_code(),
            message: self.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
