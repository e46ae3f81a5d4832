//! Greedy k-center selection.
//!
//! Approximates `min_B max_{i ∈ pool} min_{j ∈ B ∪ labeled} Δ(x_i, x_j)` with
//! Euclidean `Δ`: repeatedly add the pool point farthest from its nearest
//! center. The greedy batch is within a factor two of the optimal radius.

use super::{check_rows, EmbeddingMatrix, Result, SelectionBatch, StrategyError};

pub fn select_coreset(
    embeddings: &EmbeddingMatrix,
    labeled: &[usize],
    pool: &[usize],
    k: usize,
) -> Result<SelectionBatch> {
    if k == 0 {
        return Err(StrategyError::InvalidArgument("k must be at least 1".into()));
    }
    check_rows(labeled, embeddings.len())?;
    check_rows(pool, embeddings.len())?;

    // Squared distance from each pool point to its nearest center.
    let mut nearest: Vec<f64> =
        pool.iter().map(|&p| labeled.iter().map(|&l| embeddings.sq_dist(p, l)).fold(f64::INFINITY, f64::min)).collect();
    let mut taken = vec![false; pool.len()];
    let take = k.min(pool.len());
    let mut chosen = Vec::with_capacity(take);
    let mut rationale = Vec::with_capacity(take);

    for _ in 0..take {
        let mut best: Option<usize> = None;
        for (pos, &d) in nearest.iter().enumerate() {
            if taken[pos] {
                continue;
            }
            best = match best {
                None => Some(pos),
                Some(b) if d > nearest[b] || (d == nearest[b] && pool[pos] < pool[b]) => Some(pos),
                keep => keep,
            };
        }
        let pos = best.expect("take <= pool size");
        taken[pos] = true;
        chosen.push(pool[pos]);
        rationale.push(nearest[pos].sqrt());
        let center = pool[pos];
        for (q, &p) in pool.iter().enumerate() {
            if !taken[q] {
                nearest[q] = nearest[q].min(embeddings.sq_dist(p, center));
            }
        }
    }
    Ok(SelectionBatch { chosen, rationale, truncated: k > pool.len() })
}

/// `max_{i ∈ pool} min_{j ∈ centers} Δ(x_i, x_j)`; infinite with no centers.
pub fn coreset_radius(embeddings: &EmbeddingMatrix, centers: &[usize], pool: &[usize]) -> f64 {
    pool.iter()
        .map(|&p| centers.iter().map(|&c| embeddings.sq_dist(p, c)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
        .sqrt()
}
