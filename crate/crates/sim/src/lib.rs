//! File formats, experiment drivers and the `sim` command line for the
//! `eema-core` simulator.
//!
//! Log verbosity follows the `EEMA_LOG` environment variable (`error`,
//! `warn`, `info`, `debug`, `trace`, or any `env_logger` filter).

pub mod config;
pub mod error;
pub mod experiments;
pub mod export;

pub use config::{load_config, parse_config, Experiment, ExperimentSpec, Format, ProtocolName, ScenarioSpec, Seeds};
pub use error::{Error, Result};
pub use experiments::{run_experiment, Body, RunOutput};
pub use export::export;

/// Environment variable read for the log filter.
pub const LOG_ENV: &str = "EEMA_LOG";
