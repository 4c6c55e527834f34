//! The `newsfair` pipeline: configuration, run directories and stages.
//!
//! Every stage is a function from files in a run directory to new files in
//! the same directory, so any prefix of the pipeline can be re-run alone.

pub mod config;
pub mod error;
pub mod pipeline;

pub use config::{Overrides, PipelineConfig};
pub use error::{Failure, Stage, StageError};
pub use pipeline::Workspace;
