//! Command-line front end and experiment harness.

pub mod app;
pub mod experiments;
pub mod manifest;
pub mod report;

use thiserror::Error;

pub use experiments::run_experiment;
pub use manifest::Manifest;
pub use report::ExperimentReport;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] normlab_core::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const FAILED_CHECK: i32 = 1;
    pub const USAGE: i32 = 2;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(normlab_core::Error::DataQuality(_)) => exit::FAILED_CHECK,
            _ => exit::USAGE,
        }
    }
}
