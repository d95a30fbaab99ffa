//! File formats, configuration and the command pipeline behind the
//! `diachron` binary.

use std::path::PathBuf;

pub mod config;
pub mod formats;
pub mod heatmap;
pub mod io;
pub mod manifest;
pub mod pipeline;

pub use config::{ConfigError, PipelineConfig};
pub use pipeline::{run_command, Command};

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Invalid input, flags or configuration.
pub const EXIT_VALIDATION: i32 = 1;
/// Reading or writing files failed.
pub const EXIT_IO: i32 = 2;
/// An internal invariant broke.
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}{error}", file.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default())]
    Config { file: Option<PathBuf>, error: ConfigError },
    #[error(transparent)]
    Core(#[from] diachron_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: line {line}: {message}", path.display())]
    Format { path: PathBuf, line: usize, message: String },
    #[error("{}: not found; run `diachron {producer}` first", path.display())]
    MissingArtifact { path: PathBuf, producer: &'static str },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::MissingArtifact { .. } => EXIT_IO,
            CliError::Core(e) if e.is_invariant() => EXIT_INVARIANT,
            _ => EXIT_VALIDATION,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(error: ConfigError) -> Self {
        CliError::Config { file: None, error }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
