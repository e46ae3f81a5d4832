//! BADGE: k-means++ seeding over hallucinated last-layer gradients.
//!
//! For a linear output layer with softmax cross-entropy, the gradient of the
//! loss at the model's own argmax label `ŷ` with respect to the output
//! weights is `(p − onehot(ŷ)) ⊗ h`, where `h` is the penultimate activation.

use ndarray::Array2;
use rand::Rng;

use super::{EmbeddingMatrix, Result, SelectionBatch, StrategyError};
use crate::posterior::LabelDistribution;
use crate::seeding::rng_from;

/// Gradient embedding of one point, flattened class-major to `C·d`.
pub fn badge_embedding(probs: &LabelDistribution, penultimate: &[f64]) -> Vec<f64> {
    let y_hat = probs.argmax();
    let d = penultimate.len();
    let mut g = Vec::with_capacity(probs.classes() * d);
    for (c, &p) in probs.probs().iter().enumerate() {
        let coeff = if c == y_hat { p - 1.0 } else { p };
        g.extend(penultimate.iter().map(|&h| coeff * h));
    }
    g
}

/// Row-wise [`badge_embedding`] for an `N × C` probability matrix and an
/// `N × d` feature matrix.
pub fn badge_embeddings(point_probs: &Array2<f64>, penultimate: &Array2<f64>) -> Result<EmbeddingMatrix> {
    if point_probs.nrows() != penultimate.nrows() {
        return Err(StrategyError::InvalidArgument(format!(
            "{} probability rows but {} feature rows",
            point_probs.nrows(),
            penultimate.nrows()
        )));
    }
    let (c, d) = (point_probs.ncols(), penultimate.ncols());
    let mut out = Array2::zeros((point_probs.nrows(), c * d));
    for (i, mut dst) in out.rows_mut().into_iter().enumerate() {
        let p = LabelDistribution::new(point_probs.row(i).to_vec())?;
        let h = penultimate.row(i).to_vec();
        dst.iter_mut().zip(badge_embedding(&p, &h)).for_each(|(o, g)| *o = g);
    }
    EmbeddingMatrix::new(out)
}

/// k-means++ seeding: the first center uniformly at random, each further
/// center with probability proportional to its squared distance from the
/// nearest chosen center. When every remaining row sits on a chosen center,
/// the draw falls back to uniform over the unchosen rows.
///
/// Returns row indices of `embeddings`.
pub fn select_badge(embeddings: &EmbeddingMatrix, k: usize, seed: u64) -> Result<SelectionBatch> {
    if k == 0 {
        return Err(StrategyError::InvalidArgument("k must be at least 1".into()));
    }
    let n = embeddings.len();
    let take = k.min(n);
    let mut rng = rng_from(seed);
    let mut taken = vec![false; n];
    let mut nearest = vec![f64::INFINITY; n];
    let mut chosen = Vec::with_capacity(take);
    let mut rationale = Vec::with_capacity(take);

    for round in 0..take {
        let total: f64 = if round == 0 { 0.0 } else { (0..n).filter(|&r| !taken[r]).map(|r| nearest[r]).sum() };
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut last = None;
            let mut hit = None;
            for r in (0..n).filter(|&r| !taken[r] && nearest[r] > 0.0) {
                acc += nearest[r];
                last = Some(r);
                if acc > target {
                    hit = Some(r);
                    break;
                }
            }
            hit.or(last).expect("positive mass implies a candidate")
        } else {
            let remaining: Vec<usize> = (0..n).filter(|&r| !taken[r]).collect();
            remaining[rng.random_range(0..remaining.len())]
        };
        taken[pick] = true;
        chosen.push(pick);
        rationale.push(if round == 0 { 0.0 } else { nearest[pick] });
        for r in 0..n {
            if !taken[r] {
                nearest[r] = nearest[r].min(embeddings.sq_dist(r, pick));
            }
        }
    }
    Ok(SelectionBatch { chosen, rationale, truncated: k > n })
}
