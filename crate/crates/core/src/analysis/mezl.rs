//! Zero-one loss reduction and the case where MEZL cannot see information.
//!
//! Under zero-one loss the expected reduction from observing `Y_i` is
//!
//! ```text
//! Σ_j [ E_{y_i} max_c Pr(Y_j = c | y_i) − max_c Pr(Y_j = c) ]
//! ```
//!
//! which is zero unless some outcome of `Y_i` changes the predicted class of
//! some `Y_j`. A candidate can therefore carry real information about the
//! validation labels and still be worth nothing to MEZL.

use serde::{Deserialize, Serialize};

use super::finite::{condition, joint_of, marginal, mezl_scores, mi_labels, FiniteLabelModel};
use super::{Check, Result};
use crate::models::DirichletCategoricalModel;
use crate::posterior::argmax;

/// Exact zero-one loss reduction for candidate `i` against `val`.
///
/// Per validation point the sum runs over outcomes of `Y_i` as
/// `Pr(y_i, a(y_i)) − Pr(y_i, c*)`, where `c*` is the current prediction and
/// `a(y_i)` the prediction after observing `y_i`. Terms where the prediction
/// does not move are exactly zero.
pub fn mezl_loss_reduction<M: FiniteLabelModel + ?Sized>(model: &M, i: usize, val: &[usize]) -> Result<f64> {
    let c = model.classes();
    let mut total = 0.0;
    for &j in val {
        let joint = joint_of(model, &[i, j])?;
        let mut col = vec![0.0; c];
        for row in joint.chunks(c) {
            col.iter_mut().zip(row).for_each(|(a, b)| *a += b);
        }
        let current = argmax(&col);
        for row in joint.chunks(c) {
            let after = argmax(row);
            if after != current {
                total += row[after] - row[current];
            }
        }
    }
    Ok(total)
}

/// Cells of [`confidence_model`].
pub const CANDIDATE: usize = 0;
pub const NULL: usize = 1;
pub const VAL: usize = 2;

/// Two hypotheses with weights `(w, 1 − w)`. The candidate cell reveals the
/// hypothesis, the null cell is a fair coin under both, and the validation
/// cell has `Pr(Y = 0)` equal to `p_a` or `p_b`.
pub fn confidence_model(w: f64, p_a: f64, p_b: f64) -> Result<DirichletCategoricalModel> {
    Ok(DirichletCategoricalModel::new(
        vec![
            vec![vec![1.0, 0.0], vec![0.5, 0.5], vec![p_a, 1.0 - p_a]],
            vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![p_b, 1.0 - p_b]],
        ],
        vec![w, 1.0 - w],
    )?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MezlFailureReport {
    /// `Pr(Y_v = 0)` before any query.
    pub val_confidence: f64,
    /// `Pr(Y_v = 0 | Y_cand = y)` for `y = 0, 1`.
    pub val_confidence_after: [f64; 2],
    pub candidate_reduction: f64,
    pub null_reduction: f64,
    pub candidate_mi: f64,
    pub null_mi: f64,
    pub candidate_mezl: f64,
    pub null_mezl: f64,
    /// Same construction with weights `(0.4, 0.6)` and `p_b = 0.4`, where the
    /// second outcome flips the prediction.
    pub flipping_reduction: f64,
    pub checks: Vec<Check>,
}

impl MezlFailureReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Weights `(0.2, 0.8)`, `p_a = 0.9`, `p_b = 0.525`: the validation prediction
/// is class 0 with confidence 0.6, and the candidate moves it to 0.9 or 0.525
/// without ever flipping it.
pub fn mezl_failure() -> Result<MezlFailureReport> {
    let model = confidence_model(0.2, 0.9, 0.525)?;
    let val = [VAL];
    let val_confidence = marginal(&model, VAL)?[0];
    let after = |y| -> Result<f64> { Ok(marginal(&condition(&model, CANDIDATE, y)?, VAL)?[0]) };
    let val_confidence_after = [after(0)?, after(1)?];
    let candidate_reduction = mezl_loss_reduction(&model, CANDIDATE, &val)?;
    let null_reduction = mezl_loss_reduction(&model, NULL, &val)?;
    let candidate_mi = mi_labels(&model, CANDIDATE, VAL)?;
    let null_mi = mi_labels(&model, NULL, VAL)?;
    let mezl = mezl_scores(&model, &[CANDIDATE, NULL], &val)?;
    let flipping = confidence_model(0.4, 0.9, 0.4)?;
    let flipping_reduction = mezl_loss_reduction(&flipping, CANDIDATE, &val)?;

    let checks = vec![
        Check::within("prior val confidence", val_confidence, 0.6, 1e-12),
        Check::within("val confidence after y=0", val_confidence_after[0], 0.9, 1e-12),
        Check::at_least("val prediction kept after y=1", val_confidence_after[1], 0.5),
        Check::equals("candidate zero-one reduction", candidate_reduction, 0.0),
        Check::at_least("candidate I(Y_cand;Y_v)", candidate_mi, 0.05),
        Check::at_least("MELL margin over null", candidate_mi - null_mi, f64::MIN_POSITIVE),
        Check::within("MEZL score gap to null", mezl[0] - mezl[1], 0.0, 1e-12),
        Check::equals("MEZL reduction gap to null", candidate_reduction - null_reduction, 0.0),
        Check::at_least("flipping candidate reduction", flipping_reduction, f64::MIN_POSITIVE),
    ];
    Ok(MezlFailureReport {
        val_confidence,
        val_confidence_after,
        candidate_reduction,
        null_reduction,
        candidate_mi,
        null_mi,
        candidate_mezl: mezl[0],
        null_mezl: mezl[1],
        flipping_reduction,
        checks,
    })
}
