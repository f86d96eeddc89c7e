use std::io;
use std::path::PathBuf;

use refgeo_core::synth::SynthError;
use refgeo_core::{ConfigError, IngestError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input file not found: {}", .0.display())]
    MissingInput(PathBuf),
    #[error("{}: {source}", .file.display())]
    InvalidConfig { file: PathBuf, source: ConfigError },
    #[error("missing upstream artifact {}; run `refgeo {stage}` first", .path.display())]
    MissingArtifact { path: PathBuf, stage: &'static str },
    #[error("upstream artifact {} was produced from a different input or config; rerun `refgeo {stage}`", .path.display())]
    StaleArtifact { path: PathBuf, stage: &'static str },
    #[error("{context}: {source}")]
    Io { context: String, source: io::Error },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::MissingInput(_) => 2,
            CliError::InvalidConfig { .. } => 3,
            CliError::MissingArtifact { .. } | CliError::StaleArtifact { .. } => 4,
            _ => 1,
        }
    }

    pub(crate) fn io(context: impl Into<String>) -> impl FnOnce(io::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }
}
