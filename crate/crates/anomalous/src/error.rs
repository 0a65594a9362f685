use std::io;
use std::path::PathBuf;

use anomalous_core::CoreError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("RepoUnavailable: {source_name}: {reason}")]
    RepoUnavailable { source_name: String, reason: String },
    #[error("EmptyRepository: {0} has no non-merge commits")]
    EmptyRepository(String),
    #[error("CorruptHistory: {0}")]
    CorruptHistory(String),
    #[error("invalid configuration: {0}")]
    Config(#[from] CoreError),
    #[error("cannot read config file {path}: {reason}")]
    ConfigFile { path: PathBuf, reason: String },
    #[error("unknown preset `{0}` (expected npm-table1 or malicious-v2)")]
    UnknownPreset(String),
    #[error("RateLimited: retry after {retry_after_secs}s exceeded the retry budget")]
    RateLimited { retry_after_secs: u64 },
    #[error("NetworkError: {0}")]
    Network(String),
    #[error("ForgeIO: {0}")]
    Forge(String),
    #[error("invalid forge script: {0}")]
    ForgeScript(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
