//! File formats, experiment grid and report writers around `stockcast-core`.

pub mod config;
pub mod csv_io;
pub mod error;
pub mod grid;
pub mod models;
pub mod report;
pub mod synth;

pub use config::{ExperimentConfig, ModelKind, ParamKind};
pub use error::{BenchError, Result};
pub use grid::{run_grid, run_grid_with, Evaluator, GridOutcome, RunRecord};
pub use report::{summarize, write_report, AverageRecord, Report};
