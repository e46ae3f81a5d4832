use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;

use super::{check_rows, Result, ScoreVector, StrategyError};
use crate::posterior::{entropy_of, PosteriorTensor, SUM_TOLERANCE};
use crate::seeding::rng_from;

/// BALD: `H(mean predictive) − 1/T Σ_t H(p_t)`, the mutual information
/// between a candidate's label and the parameters.
pub fn score_bald(tensor: &PosteriorTensor, pool: &[usize]) -> Result<ScoreVector> {
    check_rows(pool, tensor.points())?;
    let c = tensor.classes();
    let t_len = tensor.samples();
    let scores = pool
        .par_iter()
        .map_init(
            || vec![0.0; c],
            |marg, &i| {
                tensor.marginal_into(i, marg);
                let total = entropy_of(marg);
                let mut aleatoric = 0.0;
                for t in 0..t_len {
                    aleatoric += entropy_of(tensor.row(t, i));
                }
                (total - aleatoric / t_len as f64).max(0.0)
            },
        )
        .collect();
    ScoreVector::new(pool.to_vec(), scores)
}

/// Entropy of the MC-averaged predictive.
pub fn score_entropy_mc(tensor: &PosteriorTensor, pool: &[usize]) -> Result<ScoreVector> {
    check_rows(pool, tensor.points())?;
    let c = tensor.classes();
    let mut marg = vec![0.0; c];
    let scores = pool
        .iter()
        .map(|&i| {
            tensor.marginal_into(i, &mut marg);
            entropy_of(&marg)
        })
        .collect();
    ScoreVector::new(pool.to_vec(), scores)
}

/// Entropy of the point-estimate predictive (`N × C`, one distribution per row).
pub fn score_entropy(point_probs: &Array2<f64>, pool: &[usize]) -> Result<ScoreVector> {
    check_rows(pool, point_probs.nrows())?;
    let mut scores = Vec::with_capacity(pool.len());
    for &i in pool {
        let row = point_probs.row(i);
        let row = row.as_slice().map(<[f64]>::to_vec).unwrap_or_else(|| row.to_vec());
        let sum: f64 = row.iter().sum();
        if row.iter().any(|p| !(0.0..=1.0).contains(p)) || (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(StrategyError::InvalidArgument(format!("row {i} is not a distribution")));
        }
        scores.push(entropy_of(&row));
    }
    ScoreVector::new(pool.to_vec(), scores)
}

/// `n` i.i.d. uniform `[0, 1)` scores, reproducible from `seed`.
pub fn score_random(seed: u64, n: usize) -> Result<ScoreVector> {
    let mut rng = rng_from(seed);
    ScoreVector::from_scores((0..n).map(|_| rng.random::<f64>()).collect())
}
