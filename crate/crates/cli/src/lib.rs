//! Experiment runner for adaptive-distance ABC: configuration, campaigns,
//! and JSON/CSV outputs on top of `adaptive-abc-core`.

pub mod config;
pub mod error;
pub mod executor;
pub mod output;
pub mod runner;

pub use config::{parse_config, validate_config, ExperimentConfig};
pub use error::{CliError, Result};
pub use executor::Rayon;
pub use runner::{run_experiment, CampaignOutcome};
