//! The pool-based acquisition loop.

use std::time::Instant;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::data::{make_split, make_synthetic_dataset, subsample, Dataset, Split};
use super::metrics::{auc_simpson, AucMethod};
use super::{EngineError, Result};
use crate::models::{BayesianClassifier, DropoutMlp};
use crate::posterior::argmax;
use crate::seeding::{derive_seed, stream};
use crate::strategies::{
    badge_embeddings, score_bald, score_entropy, score_entropy_mc, score_mell, score_mezl, score_random, select_badge,
    select_coreset, select_top_k, EmbeddingMatrix, SelectionBatch, Strategy,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub n_labeled: usize,
    pub test_accuracy: f64,
    pub train_seconds: f64,
    pub score_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub strategy: Strategy,
    pub shift_rule: String,
    pub split_sizes: [usize; 4],
    pub iterations: Vec<IterationRecord>,
    /// Dataset indices queried at each iteration, in selection order.
    pub selections: Vec<Vec<usize>>,
    pub auc: f64,
    pub auc_method: AucMethod,
    pub notes: Vec<String>,
}

impl ExperimentResult {
    pub fn budgets(&self) -> Vec<usize> {
        self.iterations.iter().map(|r| r.n_labeled).collect()
    }

    pub fn accuracies(&self) -> Vec<f64> {
        self.iterations.iter().map(|r| r.test_accuracy).collect()
    }
}

/// Dataset for `cfg`: fixed by `data.seed` if set, otherwise derived from the
/// experiment seed.
pub fn dataset_for(cfg: &ExperimentConfig) -> Result<Dataset> {
    let seed = cfg.data.seed.unwrap_or_else(|| derive_seed(cfg.seed, &[stream::DATA]));
    make_synthetic_dataset(&cfg.data, cfg.total_points(), seed)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let data = dataset_for(cfg)?;
    run_experiment_on(cfg, &data)
}

/// Run the loop on a caller-supplied dataset.
pub fn run_experiment_on(cfg: &ExperimentConfig, data: &Dataset) -> Result<ExperimentResult> {
    cfg.validate()?;
    if data.features.ncols() != cfg.data.dim || data.classes != cfg.data.classes {
        return Err(EngineError::Config("dataset shape does not match [data]".into()));
    }
    let split = make_split(data, cfg)?;
    let b = &cfg.experiment;
    let mut labeled = split.seed.clone();
    let mut pool = split.pool.clone();
    let test_x = data.rows(&split.test);
    let test_y = data.labels_of(&split.test);

    let mut iterations = Vec::with_capacity(b.k + 1);
    let mut selections = Vec::with_capacity(b.k);
    let mut notes = Vec::new();
    let timed = |start: Instant| if cfg.output.record_timing { start.elapsed().as_secs_f64() } else { 0.0 };

    for k in 0..=b.k {
        let start = Instant::now();
        let mut model = DropoutMlp::new(
            cfg.data.dim,
            cfg.data.classes,
            cfg.model.clone(),
            derive_seed(cfg.seed, &[stream::TRAIN, k as u64]),
        )?;
        model.fit(data.rows(&labeled).view(), &data.labels_of(&labeled))?;
        let train_seconds = timed(start);
        let test_accuracy = accuracy(&model.point_predictive(test_x.view()), &test_y);
        let n_labeled = labeled.len();

        let mut score_seconds = 0.0;
        if k < b.k {
            let start = Instant::now();
            let batch = select_batch(cfg, &model, data, &split, &labeled, &pool, k)?;
            score_seconds = timed(start);
            if batch.truncated {
                notes.push(format!("iteration {k}: batch truncated to {}", batch.len()));
            }
            pool.retain(|i| !batch.chosen.contains(i));
            labeled.extend_from_slice(&batch.chosen);
            selections.push(batch.chosen);
        }
        iterations.push(IterationRecord { iteration: k, n_labeled, test_accuracy, train_seconds, score_seconds });
    }

    let xs: Vec<f64> = iterations.iter().map(|r| r.n_labeled as f64).collect();
    let ys: Vec<f64> = iterations.iter().map(|r| r.test_accuracy).collect();
    let auc = auc_simpson(&xs, &ys)?;
    if auc.method != AucMethod::Simpson {
        notes.push(format!("auc computed by {:?} fallback", auc.method));
    }
    Ok(ExperimentResult {
        config: cfg.clone(),
        seed: cfg.seed,
        strategy: cfg.strategy,
        shift_rule: match b.shift {
            super::config::Shift::None => "none".into(),
            super::config::Shift::Induced => "seed = n_seed points with the lowest mean feature value".into(),
        },
        split_sizes: [split.seed.len(), split.pool.len(), split.val.len(), split.test.len()],
        iterations,
        selections,
        auc: auc.value,
        auc_method: auc.method,
        notes,
    })
}

fn accuracy(probs: &Array2<f64>, labels: &[usize]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let hits = probs.rows().into_iter().zip(labels).filter(|(row, &y)| argmax(&row.to_vec()) == y).count();
    hits as f64 / labels.len() as f64
}

/// Choose the next `n_query` pool points. Only features and index sets are
/// read here; labels never reach a strategy.
pub fn select_batch(
    cfg: &ExperimentConfig,
    model: &DropoutMlp,
    data: &Dataset,
    split: &Split,
    labeled: &[usize],
    pool: &[usize],
    iteration: usize,
) -> Result<SelectionBatch> {
    if pool.is_empty() {
        return Err(EngineError::Config("pool is empty".into()));
    }
    let b = &cfg.experiment;
    let it = iteration as u64;
    let k = b.n_query;
    let posterior_seed = derive_seed(cfg.seed, &[stream::POSTERIOR, it]);
    let relabel = |batch: SelectionBatch, rows: &[usize]| SelectionBatch {
        chosen: batch.chosen.iter().map(|&r| rows[r]).collect(),
        ..batch
    };

    let batch = match cfg.strategy {
        Strategy::Mell | Strategy::Mezl => {
            let (pool_sub, _) = subsample(pool, b.j, derive_seed(cfg.seed, &[stream::POOL_SUBSAMPLE, it]));
            let (val_sub, _) = subsample(&split.val, b.l, derive_seed(cfg.seed, &[stream::VAL_SUBSAMPLE, it]));
            let rows: Vec<usize> = pool_sub.iter().chain(&val_sub).copied().collect();
            let tensor = model.posterior_predictive(data.rows(&rows).view(), b.t, posterior_seed)?;
            let cand: Vec<usize> = (0..pool_sub.len()).collect();
            let val_rows: Vec<usize> = (pool_sub.len()..rows.len()).collect();
            let scores = if cfg.strategy == Strategy::Mell {
                score_mell(&tensor, &cand, &val_rows)?
            } else {
                score_mezl(&tensor, &cand, &val_rows)?
            };
            select_top_k(&scores.with_candidates(pool_sub)?, k)?
        }
        Strategy::Bald | Strategy::EntropyMc => {
            let tensor = model.posterior_predictive(data.rows(pool).view(), b.t, posterior_seed)?;
            let cand: Vec<usize> = (0..pool.len()).collect();
            let scores = if cfg.strategy == Strategy::Bald {
                score_bald(&tensor, &cand)?
            } else {
                score_entropy_mc(&tensor, &cand)?
            };
            select_top_k(&scores.with_candidates(pool.to_vec())?, k)?
        }
        Strategy::Entropy => {
            let probs = model.point_predictive(data.rows(pool).view());
            let scores = score_entropy(&probs, &(0..pool.len()).collect::<Vec<_>>())?;
            select_top_k(&scores.with_candidates(pool.to_vec())?, k)?
        }
        Strategy::Random => {
            let scores = score_random(derive_seed(cfg.seed, &[stream::SELECT, it]), pool.len())?;
            select_top_k(&scores.with_candidates(pool.to_vec())?, k)?
        }
        Strategy::Coreset => {
            let rows: Vec<usize> = labeled.iter().chain(pool).copied().collect();
            let emb = model
                .embeddings(data.rows(&rows).view())
                .ok_or_else(|| EngineError::Config("model has no embeddings".into()))?;
            let emb = EmbeddingMatrix::new(emb)?;
            let centers: Vec<usize> = (0..labeled.len()).collect();
            let cand: Vec<usize> = (labeled.len()..rows.len()).collect();
            relabel(select_coreset(&emb, &centers, &cand, k)?, &rows)
        }
        Strategy::Badge => {
            let x = data.rows(pool);
            let h = model.embeddings(x.view()).ok_or_else(|| EngineError::Config("model has no embeddings".into()))?;
            let probs = model.point_predictive(x.view());
            let emb = badge_embeddings(&probs, &h)?;
            relabel(select_badge(&emb, k, derive_seed(cfg.seed, &[stream::SELECT, it]))?, pool)
        }
    };
    Ok(batch)
}
