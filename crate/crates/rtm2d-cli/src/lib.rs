//! Library surface of the experiment harness; the `rtm2d` binary is a thin
//! wrapper over these modules so integration tests can drive the pipeline
//! in-process.

pub mod config;
pub mod error;
pub mod experiment;
pub mod info;

pub use config::ExperimentConfig;
pub use error::CliError;
pub use experiment::{run_experiment, verify_suite, Manifest, Overrides};
