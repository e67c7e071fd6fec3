//! Batch runner for the `perc_lab` estimators: config parsing, experiment
//! dispatch, result files and the self-test suite.

pub mod config;
pub mod output;
pub mod run;
pub mod selftest;

pub use config::{ConfigError, Experiment, ExperimentConfig, Params};
pub use output::{emit_plot_data, PlotKind, PlotPoint};
pub use run::{execute, write_outputs, RunError, RunOutput};
