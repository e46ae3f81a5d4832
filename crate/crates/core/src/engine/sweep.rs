//! Strategy × seed sweeps.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::results::{write_aggregate, write_run};
use super::runner::{run_experiment, ExperimentResult};
use super::{EngineError, Result};
use crate::strategies::Strategy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub strategy: Strategy,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, Default)]
pub struct SweepReport {
    /// Successful cells, ordered by strategy then seed as requested.
    pub results: Vec<ExperimentResult>,
    pub failures: Vec<CellFailure>,
}

/// Run every (strategy, seed) cell with up to `parallel` cells at once.
/// Failing cells are recorded, not fatal.
pub fn run_sweep(
    base: &ExperimentConfig,
    strategies: &[Strategy],
    seeds: &[u64],
    parallel: usize,
) -> Result<SweepReport> {
    if strategies.is_empty() || seeds.is_empty() {
        return Err(EngineError::Config("a sweep needs at least one strategy and one seed".into()));
    }
    let cells: Vec<(Strategy, u64)> =
        strategies.iter().flat_map(|&s| seeds.iter().map(move |&seed| (s, seed))).collect();
    let run_cell = |&(strategy, seed): &(Strategy, u64)| {
        let cfg = ExperimentConfig { strategy, seed, ..base.clone() };
        cfg.validate().and_then(|_| run_experiment(&cfg)).map_err(|e| CellFailure {
            strategy,
            seed,
            error: e.to_string(),
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel.max(1))
        .build()
        .map_err(|e| EngineError::Config(e.to_string()))?;
    let outcomes: Vec<_> = pool.install(|| cells.par_iter().map(run_cell).collect());
    let mut report = SweepReport::default();
    for o in outcomes {
        match o {
            Ok(r) => report.results.push(r),
            Err(f) => report.failures.push(f),
        }
    }
    Ok(report)
}

pub fn write_sweep(dir: &Path, report: &SweepReport) -> Result<()> {
    for r in &report.results {
        write_run(dir, r)?;
    }
    write_aggregate(dir, &report.results)?;
    if !report.failures.is_empty() {
        let mut w = csv::Writer::from_path(dir.join("failures.csv"))?;
        for f in &report.failures {
            w.serialize(f)?;
        }
        w.flush()?;
    }
    Ok(())
}
