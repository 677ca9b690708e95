use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read config {path}: {source}")]
    ReadConfig {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("malformed config: {0}")]
    Config(String),

    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        source: csv::Error,
    },

    #[error("numerical failure: {0}")]
    Numerical(#[from] infogeo_core::Error),

    #[error("gradient check failed: max relative error {max_error:e} exceeds {tolerance:e}")]
    GradCheck { max_error: f64, tolerance: f64 },
}

impl CliError {
    /// `1` for unusable input or output, `2` for failures of the computation itself.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ReadConfig { .. } | CliError::Config(_) | CliError::Output { .. } => 1,
            CliError::Numerical(_) | CliError::GradCheck { .. } => 2,
        }
    }
}

pub(crate) fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}
