//! Built-in validation suites, parameter sweeps and their reports.
//!
//! Every cell runs one (topology, scenario) pair over a list of seeds and
//! reduces the runs to the largest measured value. Cells are independent and
//! run in parallel; reports are sorted by key so output never depends on
//! scheduling.

mod config;
mod report;
mod suites;
mod sweep;

pub use config::*;
pub use report::{format_pessimism, ReportRow, Summary, ValidationReport};
pub use suites::*;
pub use sweep::{parse_range, run_sweep, sweep_csv, Dimension, SweepPoint, SweepRequest};

use thiserror::Error;

use crate::model::ModelError;
use crate::sim::SimError;
use crate::system::AnalysisError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{0}")]
    Config(String),
}
