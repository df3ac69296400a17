//! Configuration, experiment orchestration and output files for the
//! `sse-bandit` command.

pub mod config;
pub mod experiment;
pub mod verify;

pub use config::{parse_config, parse_str, ExperimentConfig, NamedProfile};
pub use experiment::{run_experiment, ProfileOutcome};
