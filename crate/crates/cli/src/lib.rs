//! Configuration, orchestration and file output for the `ghostproc` binary.

pub mod config;
pub mod error;
pub mod experiment;

pub use config::{parse_config, parse_config_with_env, ExperimentConfig};
pub use error::{CliError, ConfigError};
pub use experiment::{emit_pattern_gallery, run_experiment, RunReport};
