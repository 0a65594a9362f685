//! Detection of anomalous and potentially malicious commits.
//!
//! The analysis itself lives in [`anomalous_core`]; this crate reads git
//! histories, gathers platform metadata, resolves configuration, renders
//! reports and forges synthetic repositories for evaluation.

pub mod config_io;
pub mod error;
pub mod forge;
pub mod ingest;
pub mod pipeline;
pub mod platform;
pub mod report;

pub use anomalous_core as core;
pub use error::{Error, Result};
pub use pipeline::{run_analyze, AnalyzeOptions, OutputFormat, RunOutcome, EXIT_CLEAN, EXIT_ERROR, EXIT_FLAGGED};
