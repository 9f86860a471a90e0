//! Batch driver for the gblab experiments: configuration, experiment
//! kernels, report files and SVG plots.

pub mod config;
pub mod experiments;
pub mod report;
pub mod svg;

pub use config::{ConfigError, Experiment, ExperimentConfig, RawConfig};
pub use report::{Outcome, Report};
