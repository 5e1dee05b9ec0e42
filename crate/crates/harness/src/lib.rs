//! Experiment runner for MCM shadow estimation: configuration, grid
//! execution, CSV output, slope fits and oracle self-checks.

pub mod config;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod oracles;
pub mod output;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{HarnessError, Result};
pub use experiments::{run_experiment, ResultRow};
