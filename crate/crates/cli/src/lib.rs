//! Batch pipeline around `hexsurf`: surface assembly, 1-forms, periods,
//! theta values, basis grids, hole problems and the reproduction tables.

pub mod artifacts;
pub mod grid;
pub mod pipeline;
pub mod reproduce;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(String),
    #[error(transparent)]
    Core(#[from] hexsurf::Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 1 for numerical failures, 2 for usage and configuration errors.
    pub fn exit_code(&self) -> i32 {
        use hexsurf::Error as E;
        match self {
            CliError::Numeric(_) => 1,
            CliError::Core(E::Config(_) | E::Io(_) | E::Json(_) | E::GluingInvalid(_)) => 2,
            CliError::Core(_) => 1,
            CliError::Usage(_) | CliError::Io { .. } | CliError::Json(_) => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
