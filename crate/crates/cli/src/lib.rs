//! File formats, HTTP ingestion, parallel drivers and the end-to-end pipeline
//! around [`rmtfactor_core`].

pub mod error;
pub mod export;
pub mod fetch;
pub mod panel;
pub mod parallel;
pub mod pipeline;
pub mod tw_cache;

pub use error::{CliError, Result, Stage, StageError};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineReport};
