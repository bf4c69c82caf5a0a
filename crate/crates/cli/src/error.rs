use std::path::PathBuf;

use airsim_core::{AnalyticsError, IndexError, IngestError, SpatialError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    NoData(String),
    #[error("{0}")]
    NoStations(String),
    #[error("{} exists; pass --force to overwrite", .0.display())]
    OutputExists(PathBuf),
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: IngestError },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Spatial(#[from] SpatialError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
}

impl CliError {
    /// Stable identifier printed in diagnostic lines.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Config(_) => "InvalidConfig",
            CliError::NoData(_) => "NoData",
            CliError::NoStations(_) => "NoStations",
            CliError::OutputExists(_) => "OutputExists",
            CliError::File { source, .. } | CliError::Ingest(source) => ingest_code(source),
            CliError::Io { .. } => "IoError",
            CliError::Index(_) => "IndexError",
            CliError::Spatial(SpatialError::NoStations) => "NoStations",
            CliError::Spatial(SpatialError::SinkFailure(_)) => "SinkFailure",
            CliError::Spatial(_) => "SpatialError",
            CliError::Analytics(AnalyticsError::NoData(_)) => "NoData",
            CliError::Analytics(_) => "AnalyticsError",
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

fn ingest_code(e: &IngestError) -> &'static str {
    match e {
        IngestError::UnreadableInput(_) => "UnreadableInput",
        IngestError::UnknownProfile(_) => "UnknownProfile",
        IngestError::UnsupportedConversion { .. } => "UnsupportedConversion",
        IngestError::NoData(_) => "NoData",
        IngestError::InvalidCatalog { .. } => "InvalidCatalog",
        _ => "IngestError",
    }
}
