//! Expected-error-reduction scores.
//!
//! For a candidate `i` and validation points `j`, the log-loss variant (MELL)
//! reduces to
//!
//! ```text
//! Score_i = n_val · H(Y_i) − Σ_j H(Y_j, Y_i)        (= Σ_j I(Y_i; Y_j) − Σ_j H(Y_j))
//! ```
//!
//! and the zero-one variant (MEZL, constant `−n_val` dropped) to
//!
//! ```text
//! Score_i = Σ_c Σ_j max_c' Pr(Y_j = c', Y_i = c)
//! ```
//!
//! Both need only marginals and pairwise joints of the posterior tensor.
//! Candidates are scored independently, so the pool is split across rayon
//! workers; each candidate's sum runs `j`, then `t`, then `c` ascending, which
//! keeps parallel results bit-identical to a sequential run.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_rows, Result, ScoreVector, StrategyError};
use crate::posterior::{entropy_of, PosteriorTensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Log,
    ZeroOne,
}

fn check_split(tensor: &PosteriorTensor, pool: &[usize], val: &[usize]) -> Result<()> {
    if val.is_empty() {
        return Err(StrategyError::EmptyValidation);
    }
    if pool.is_empty() {
        return Err(StrategyError::InvalidArgument("empty candidate pool".into()));
    }
    let n = tensor.points();
    check_rows(pool, n)?;
    check_rows(val, n)?;
    let mut in_val = vec![false; n];
    for &j in val {
        in_val[j] = true;
    }
    match pool.iter().find(|&&i| in_val[i]) {
        Some(&i) => Err(StrategyError::Overlap(i)),
        None => Ok(()),
    }
}

/// Score each candidate with `per_candidate(i, joint_scratch, marginal_scratch)`.
fn score_parallel<F>(tensor: &PosteriorTensor, pool: &[usize], per_candidate: F) -> Result<ScoreVector>
where
    F: Fn(usize, &mut [f64], &mut [f64]) -> f64 + Sync,
{
    let c = tensor.classes();
    let scores: Vec<f64> = pool
        .par_iter()
        .map_init(|| (vec![0.0; c * c], vec![0.0; c]), |(joint, marg), &i| per_candidate(i, joint, marg))
        .collect();
    ScoreVector::new(pool.to_vec(), scores)
}

/// MELL: `n_val · H(Y_i) − Σ_j H(Y_j, Y_i)`.
pub fn score_mell(tensor: &PosteriorTensor, pool: &[usize], val: &[usize]) -> Result<ScoreVector> {
    check_split(tensor, pool, val)?;
    let n_val = val.len() as f64;
    score_parallel(tensor, pool, |i, joint, marg| {
        tensor.marginal_into(i, marg);
        let h_i = entropy_of(marg);
        let mut joint_sum = 0.0;
        for &j in val {
            tensor.joint_into(i, j, joint);
            joint_sum += entropy_of(joint);
        }
        n_val * h_i - joint_sum
    })
}

/// MELL in mutual-information form, `Σ_j I(Y_i; Y_j)`. Differs from
/// [`score_mell`] by the candidate-independent constant `Σ_j H(Y_j)`.
pub fn score_mell_information(tensor: &PosteriorTensor, pool: &[usize], val: &[usize]) -> Result<ScoreVector> {
    check_split(tensor, pool, val)?;
    let c = tensor.classes();
    let mut val_entropy = Vec::with_capacity(val.len());
    let mut buf = vec![0.0; c];
    for &j in val {
        tensor.marginal_into(j, &mut buf);
        val_entropy.push(entropy_of(&buf));
    }
    score_parallel(tensor, pool, |i, joint, marg| {
        tensor.marginal_into(i, marg);
        let h_i = entropy_of(marg);
        let mut total = 0.0;
        for (&j, &h_j) in val.iter().zip(&val_entropy) {
            tensor.joint_into(i, j, joint);
            total += (h_i + h_j - entropy_of(joint)).max(0.0);
        }
        total
    })
}

/// MEZL: `Σ_c Σ_j max_c' Pr(Y_j = c', Y_i = c)`.
pub fn score_mezl(tensor: &PosteriorTensor, pool: &[usize], val: &[usize]) -> Result<ScoreVector> {
    check_split(tensor, pool, val)?;
    let c = tensor.classes();
    score_parallel(tensor, pool, |i, joint, _| {
        let mut total = 0.0;
        for &j in val {
            tensor.joint_into(i, j, joint);
            for row in joint.chunks(c) {
                total += row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            }
        }
        total
    })
}

/// Minimum expected loss of predicting `Y ~ p` under the optimal action.
fn bayes_risk(p: &[f64], loss: LossKind) -> f64 {
    match loss {
        // The optimal log-loss action is `p` itself, so the risk is H(p).
        LossKind::Log => entropy_of(p),
        LossKind::ZeroOne => 1.0 - p.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// The two-term expected-error-reduction score, candidate-independent term
/// included:
///
/// ```text
/// Σ_j min_a E[ℓ(Y_j, a)] − E_{y_i}[ Σ_j min_a E[ℓ(Y_j, a) | Y_i = y_i] ]
/// ```
///
/// Evaluated through the conditionals `Pr(Y_j | Y_i = y_i)` rather than the
/// reduced closed forms, as a cross-check on their rankings.
pub fn score_eer_full(tensor: &PosteriorTensor, pool: &[usize], val: &[usize], loss: LossKind) -> Result<ScoreVector> {
    check_split(tensor, pool, val)?;
    let c = tensor.classes();
    let mut buf = vec![0.0; c];
    let mut current = 0.0;
    for &j in val {
        tensor.marginal_into(j, &mut buf);
        current += bayes_risk(&buf, loss);
    }
    score_parallel(tensor, pool, |i, joint, marg| {
        tensor.marginal_into(i, marg);
        let mut cond = vec![0.0; c];
        let mut expected = 0.0;
        for (y_i, &p_yi) in marg.iter().enumerate() {
            if p_yi <= 0.0 {
                continue;
            }
            let mut after = 0.0;
            for &j in val {
                tensor.joint_into(i, j, joint);
                let row = &joint[y_i * c..(y_i + 1) * c];
                let mass: f64 = row.iter().sum();
                if mass <= 0.0 {
                    continue;
                }
                cond.iter_mut().zip(row).for_each(|(d, &v)| *d = v / mass);
                after += bayes_risk(&cond, loss);
            }
            expected += p_yi * after;
        }
        current - expected
    })
}
