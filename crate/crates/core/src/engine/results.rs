//! Result files.
//!
//! Per run: `<name>_<strategy>_seed<seed>.csv` with one row per iteration and a
//! matching `.json` summary. Per sweep: `aggregate.csv` and
//! `win_tie_loss.csv`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::metrics::{compare_aucs, mean_std, Outcome};
use super::runner::{ExperimentResult, IterationRecord};
use super::{EngineError, Result};
use crate::strategies::Strategy;

pub fn run_stem(result: &ExperimentResult) -> String {
    format!("{}_{}_seed{}", result.config.name, result.strategy, result.seed)
}

/// Write the CSV and JSON for one run; returns the CSV path.
pub fn write_run(dir: &Path, result: &ExperimentResult) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let stem = run_stem(result);
    let csv_path = dir.join(format!("{stem}.csv"));
    let mut w = csv::Writer::from_path(&csv_path)?;
    for record in &result.iterations {
        w.serialize(record)?;
    }
    w.flush()?;
    let json = serde_json::to_string_pretty(result)?;
    fs::write(dir.join(format!("{stem}.json")), json + "\n")?;
    Ok(csv_path)
}

pub fn read_run_csv(path: &Path) -> Result<Vec<IterationRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(EngineError::from)).collect()
}

pub fn read_summary(path: &Path) -> Result<ExperimentResult> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub strategy: Strategy,
    pub mean_auc: f64,
    pub std_auc: f64,
    pub n_seeds: usize,
}

/// Mean and sample std of AUC per strategy, in first-seen order.
pub fn aggregate(results: &[ExperimentResult]) -> Vec<AggregateRow> {
    let mut order: Vec<Strategy> = Vec::new();
    for r in results {
        if !order.contains(&r.strategy) {
            order.push(r.strategy);
        }
    }
    order
        .into_iter()
        .map(|s| {
            let aucs = aucs_of(results, s);
            let (mean_auc, std_auc) = mean_std(&aucs);
            AggregateRow { strategy: s, mean_auc, std_auc, n_seeds: aucs.len() }
        })
        .collect()
}

pub fn aucs_of(results: &[ExperimentResult], strategy: Strategy) -> Vec<f64> {
    results.iter().filter(|r| r.strategy == strategy).map(|r| r.auc).collect()
}

/// The win/tie/loss rule applied to two groups of runs; their label budgets
/// must agree.
pub fn compare_methods(a: &[ExperimentResult], b: &[ExperimentResult]) -> Result<Outcome> {
    let budgets = a.first().or(b.first()).map(ExperimentResult::budgets);
    if a.iter().chain(b).any(|r| Some(r.budgets()) != budgets) {
        return Err(EngineError::Metric("runs have different label budgets".into()));
    }
    compare_aucs(&a.iter().map(|r| r.auc).collect::<Vec<_>>(), &b.iter().map(|r| r.auc).collect::<Vec<_>>())
}

/// `outcomes[r][c]` is row strategy vs column strategy; `None` where fewer
/// than two seeds are available.
/// Row-vs-column outcomes; `None` where a side has fewer than two runs.
pub type OutcomeMatrix = Vec<Vec<Option<Outcome>>>;

pub fn win_tie_loss(results: &[ExperimentResult]) -> Result<(Vec<Strategy>, OutcomeMatrix)> {
    let rows = aggregate(results);
    let strategies: Vec<Strategy> = rows.iter().map(|r| r.strategy).collect();
    let groups: Vec<Vec<ExperimentResult>> =
        strategies.iter().map(|&s| results.iter().filter(|r| r.strategy == s).cloned().collect()).collect();
    let mut matrix = Vec::with_capacity(groups.len());
    for a in &groups {
        let mut row = Vec::with_capacity(groups.len());
        for b in &groups {
            row.push(if a.len() >= 2 && b.len() >= 2 { Some(compare_methods(a, b)?) } else { None });
        }
        matrix.push(row);
    }
    Ok((strategies, matrix))
}

pub fn write_aggregate(dir: &Path, results: &[ExperimentResult]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("aggregate.csv"))?;
    for row in aggregate(results) {
        w.serialize(row)?;
    }
    w.flush()?;

    let (strategies, matrix) = win_tie_loss(results)?;
    let mut w = csv::Writer::from_path(dir.join("win_tie_loss.csv"))?;
    let mut header = vec!["strategy".to_string()];
    header.extend(strategies.iter().map(|s| s.to_string()));
    w.write_record(&header)?;
    for (s, row) in strategies.iter().zip(matrix) {
        let mut rec = vec![s.to_string()];
        rec.extend(row.into_iter().map(|o| o.map_or("n/a", Outcome::as_str).to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
