use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] rmtfactor_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{location}: {message}")]
    Format { location: String, message: String },
    #[error("request to {url} failed: {message}")]
    Http { url: String, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Self::Csv { path: path.into(), source }
    }

    pub fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Self::Json { context: context.into(), source }
    }

    pub fn format(location: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Format { location: location.into(), message: message.into() }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// Pipeline stage, used to tag failures and pick the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Fetch,
    Ingest,
    Stationarity,
    Grid,
    Ste,
    Partition,
    Cca,
    Factors,
    TwTable,
    Report,
}

impl Stage {
    pub fn exit_code(self) -> i32 {
        match self {
            Stage::Config => 3,
            Stage::Fetch => 10,
            Stage::Ingest => 11,
            Stage::Stationarity => 12,
            Stage::Grid => 13,
            Stage::Ste => 14,
            Stage::Partition => 15,
            Stage::Cca => 16,
            Stage::Factors => 17,
            Stage::TwTable => 18,
            Stage::Report => 19,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Fetch => "fetch",
            Stage::Ingest => "ingest",
            Stage::Stationarity => "stationarity",
            Stage::Grid => "grid",
            Stage::Ste => "ste",
            Stage::Partition => "partition",
            Stage::Cca => "cca",
            Stage::Factors => "factors",
            Stage::TwTable => "tw-table",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
#[error("[{stage}] {source}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: CliError,
}

/// Attach a stage to any error convertible into [`CliError`].
pub trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, StageError>;
}

impl<T, E: Into<CliError>> AtStage<T> for std::result::Result<T, E> {
    fn at(self, stage: Stage) -> Result<T, StageError> {
        self.map_err(|e| StageError { stage, source: e.into() })
    }
}
