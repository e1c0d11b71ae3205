//! Library side of the `hasard` binary: run configuration, the six
//! commands and the artifact formats they write.

pub mod bench;
pub mod commands;
pub mod config;
pub mod visits;

pub use config::{BenchMode, Command, RunConfig, RunOptions};

use hasard_core::env::EnvError;
use hasard_play::PlayError;
use hasard_rl::TrainError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Play(#[from] PlayError),
    #[error("no data: {0}")]
    NoData(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }

    /// 2 for configuration problems, 3 for numeric failure, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Train(TrainError::Config(_) | TrainError::ShapeMismatch { .. }) => 2,
            CliError::Env(EnvError::Config(_)) | CliError::Train(TrainError::Env(EnvError::Config(_))) => 2,
            CliError::Train(TrainError::NonFinite { .. }) => 3,
            _ => 1,
        }
    }
}
