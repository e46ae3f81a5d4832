//! Experiment engine: configuration, synthetic data and splits, the
//! acquisition loop, learning-curve metrics and result files.

mod config;
mod data;
mod metrics;
mod results;
mod runner;
mod sweep;

pub use config::{apply_override, Budget, ClusterSpec, DataSpec, ExperimentConfig, OutputConfig, Shift};
pub use data::{induce_shift, make_split, make_synthetic_dataset, subsample, Dataset, Split};
pub use metrics::{auc_simpson, compare_aucs, mean_std, Auc, AucMethod, Outcome};
pub use results::{
    aggregate, aucs_of, compare_methods, read_run_csv, read_summary, run_stem, win_tie_loss, write_aggregate,
    write_run, AggregateRow, OutcomeMatrix,
};
pub use runner::{dataset_for, run_experiment, run_experiment_on, select_batch, ExperimentResult, IterationRecord};
pub use sweep::{run_sweep, write_sweep, CellFailure, SweepReport};

use thiserror::Error;

use crate::models::ModelError;
use crate::strategies::StrategyError;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("config: {0}")]
    Config(String),

    #[error("metric: {0}")]
    Metric(String),

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error(transparent)]
    Strategy(#[from] StrategyError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl EngineError {
    /// Problems with the request itself rather than with running it.
    pub fn is_config(&self) -> bool {
        matches!(self, EngineError::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, EngineError>;
