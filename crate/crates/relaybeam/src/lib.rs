//! Configuration, parallel sweeps and CSV/summary output for the
//! `relaybeam` simulator.

pub mod config;
pub mod error;
pub mod report;
pub mod runner;
pub mod sweep;

pub use config::{ConfigError, ExperimentConfig};
pub use error::RunError;
pub use runner::{run, RunOutput};
