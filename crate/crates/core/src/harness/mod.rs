//! Experiment configuration, restart studies and their outputs.

pub mod config;
pub mod emit;
pub mod report;
pub mod stats;
pub mod studies;
pub mod svg;

pub use config::{ExperimentConfig, Overrides};
pub use emit::{OutputDir, Table};
pub use studies::{Arm, ModelStudy, MultiplierStudy, RunSummary, Sweep, SweepPoint, TrotterStudy};
