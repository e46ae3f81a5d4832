//! Acquisition scores and batch selectors.
//!
//! Scored strategies (MELL, MEZL, BALD, Entropy, Entropy_MC, Random) produce a
//! [`ScoreVector`] and take the top `n_query` candidates with
//! [`select_top_k`]. Coreset and BADGE select a batch directly from an
//! [`EmbeddingMatrix`].
//!
//! Ties are always broken toward the lowest index.

mod badge;
mod coreset;
mod eer;
mod optimal;
mod select;
mod uncertainty;

pub use badge::{badge_embedding, badge_embeddings, select_badge};
pub use coreset::{coreset_radius, select_coreset};
pub use eer::{score_eer_full, score_mell, score_mell_information, score_mezl, LossKind};
pub use optimal::{expected_log_loss, verify_optimal_prediction};
pub use select::select_top_k;
pub use uncertainty::{score_bald, score_entropy, score_entropy_mc, score_random};

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::posterior::PosteriorError;

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("validation set is empty; MELL/MEZL are undefined without one")]
    EmptyValidation,

    #[error("point {0} appears in both the pool and the validation set")]
    Overlap(usize),

    #[error("index {index} out of range for {len} rows")]
    OutOfRange { index: usize, len: usize },

    #[error("non-finite score for candidate {0}")]
    NonFinite(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Posterior(#[from] PosteriorError),
}

pub type Result<T> = std::result::Result<T, StrategyError>;

/// Stable identifiers for every acquisition rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Mell,
    Mezl,
    Bald,
    Entropy,
    EntropyMc,
    Random,
    Coreset,
    Badge,
}

impl Strategy {
    pub const ALL: [Strategy; 8] = [
        Strategy::Mell,
        Strategy::Mezl,
        Strategy::Bald,
        Strategy::Entropy,
        Strategy::EntropyMc,
        Strategy::Random,
        Strategy::Coreset,
        Strategy::Badge,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Strategy::Mell => "mell",
            Strategy::Mezl => "mezl",
            Strategy::Bald => "bald",
            Strategy::Entropy => "entropy",
            Strategy::EntropyMc => "entropy_mc",
            Strategy::Random => "random",
            Strategy::Coreset => "coreset",
            Strategy::Badge => "badge",
        }
    }

    /// Needs a posterior tensor over pool and validation points.
    pub fn needs_validation(self) -> bool {
        matches!(self, Strategy::Mell | Strategy::Mezl)
    }

    /// Needs MC posterior draws at all.
    pub fn needs_posterior(self) -> bool {
        matches!(self, Strategy::Mell | Strategy::Mezl | Strategy::Bald | Strategy::EntropyMc)
    }

    /// Needs penultimate-layer features from the task model.
    pub fn needs_embeddings(self) -> bool {
        matches!(self, Strategy::Coreset | Strategy::Badge)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Strategy {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.id() == s)
            .ok_or_else(|| StrategyError::InvalidArgument(format!("unknown strategy id {s:?}")))
    }
}

/// One score per candidate, aligned with the candidate (pool) indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    candidates: Vec<usize>,
    scores: Vec<f64>,
}

impl ScoreVector {
    pub fn new(candidates: Vec<usize>, scores: Vec<f64>) -> Result<Self> {
        if candidates.len() != scores.len() {
            return Err(StrategyError::InvalidArgument(format!(
                "{} candidates but {} scores",
                candidates.len(),
                scores.len()
            )));
        }
        if let Some(pos) = scores.iter().position(|s| !s.is_finite()) {
            return Err(StrategyError::NonFinite(candidates[pos]));
        }
        Ok(Self { candidates, scores })
    }

    /// Scores for candidates `0..n`.
    pub fn from_scores(scores: Vec<f64>) -> Result<Self> {
        Self::new((0..scores.len()).collect(), scores)
    }

    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Relabel candidates, e.g. from tensor rows to dataset indices.
    pub fn with_candidates(self, candidates: Vec<usize>) -> Result<Self> {
        Self::new(candidates, self.scores)
    }

    /// Candidate positions sorted by descending score, ties by lowest candidate id.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.scores.len()).collect();
        order.sort_by(|&a, &b| {
            self.scores[b].total_cmp(&self.scores[a]).then(self.candidates[a].cmp(&self.candidates[b]))
        });
        order
    }
}

/// Per-point feature vectors: penultimate activations for Coreset, gradient
/// embeddings for BADGE.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    rows: Array2<f64>,
}

impl EmbeddingMatrix {
    pub fn new(rows: Array2<f64>) -> Result<Self> {
        if rows.ncols() == 0 {
            return Err(StrategyError::InvalidArgument("embedding dimension is zero".into()));
        }
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(StrategyError::InvalidArgument("non-finite embedding entry".into()));
        }
        Ok(Self { rows })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(StrategyError::InvalidArgument("ragged embedding rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let arr =
            Array2::from_shape_vec((rows.len(), d), flat).map_err(|e| StrategyError::InvalidArgument(e.to_string()))?;
        Self::new(arr)
    }

    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.rows
    }

    pub(crate) fn sq_dist(&self, a: usize, b: usize) -> f64 {
        self.rows.row(a).iter().zip(self.rows.row(b)).map(|(x, y)| (x - y) * (x - y)).sum()
    }
}

/// An ordered batch of distinct candidate indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionBatch {
    pub chosen: Vec<usize>,
    /// Score (top-k), distance to nearest center (Coreset) or squared
    /// distance at draw time (BADGE), aligned with `chosen`.
    pub rationale: Vec<f64>,
    /// Fewer than the requested number were available.
    pub truncated: bool,
}

impl SelectionBatch {
    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }
}

pub(crate) fn check_rows(idx: &[usize], len: usize) -> Result<()> {
    match idx.iter().find(|&&i| i >= len) {
        Some(&index) => Err(StrategyError::OutOfRange { index, len }),
        None => Ok(()),
    }
}
