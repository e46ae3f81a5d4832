//! Splitting `I(Y_i; θ)` into the part shared with `Y_j` and the rest.
//!
//! Labels are conditionally independent given `θ`, so
//! `I(Y_i; θ) = I(Y_i; Y_j) + I(Y_i; θ | Y_j)` with both terms non-negative.
//! BALD scores the left side; MELL keeps only the first term.

use serde::{Deserialize, Serialize};

use super::finite::{mi_label_theta, mi_label_theta_given, mi_labels, FiniteLabelModel};
use super::{Check, Result};
use crate::models::DirichletCategoricalModel;
use crate::seeding::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub i: usize,
    pub j: usize,
    pub label_theta: f64,
    pub labels: f64,
    pub residual: f64,
    /// `|I(Y_i;θ) − I(Y_i;Y_j) − I(Y_i;θ|Y_j)|`
    pub violation: f64,
}

/// All three terms by enumeration; the residual is computed directly from the
/// conditioned posteriors, not by subtraction.
pub fn exact_decomposition<M: FiniteLabelModel + ?Sized>(model: &M, i: usize, j: usize) -> Result<DecompositionReport> {
    let label_theta = mi_label_theta(model, i)?;
    let labels = mi_labels(model, i, j)?;
    let residual = mi_label_theta_given(model, i, j)?;
    Ok(DecompositionReport { i, j, label_theta, labels, residual, violation: (label_theta - labels - residual).abs() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionSweep {
    pub models: usize,
    pub pairs: usize,
    pub max_violation: f64,
    pub min_labels: f64,
    pub min_residual: f64,
    pub checks: Vec<Check>,
}

impl DecompositionSweep {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Check the identity on `models` random finite-support models (4 cells, up to
/// 16 hypotheses, up to 3 classes), over every ordered cell pair.
pub fn decomposition_sweep(models: usize, seed: u64) -> Result<DecompositionSweep> {
    let mut max_violation: f64 = 0.0;
    let mut min_labels = f64::INFINITY;
    let mut min_residual = f64::INFINITY;
    let mut pairs = 0;
    for k in 0..models as u64 {
        let s = derive_seed(seed, &[k]);
        let hypotheses = 1 + (s % 16) as usize;
        let classes = 2 + ((s >> 8) % 2) as usize;
        let alpha = [0.1, 0.5, 1.0, 5.0][((s >> 16) % 4) as usize];
        let model = DirichletCategoricalModel::random(4, classes, hypotheses, alpha, s)?;
        for i in 0..4 {
            for j in 0..4 {
                let r = exact_decomposition(&model, i, j)?;
                max_violation = max_violation.max(r.violation);
                min_labels = min_labels.min(r.labels);
                min_residual = min_residual.min(r.residual);
                pairs += 1;
            }
        }
    }
    let checks = vec![
        Check::at_most("identity violation", max_violation, 1e-9),
        Check::at_least("min I(Y_i;Y_j)", min_labels, -1e-9),
        Check::at_least("min I(Y_i;θ|Y_j)", min_residual, -1e-9),
    ];
    Ok(DecompositionSweep { models, pairs, max_violation, min_labels, min_residual, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::LN_2;

    #[test]
    fn single_hypothesis_has_nothing_to_learn() {
        let m = DirichletCategoricalModel::uniform(vec![vec![vec![0.3, 0.7], vec![0.5, 0.5]]]).unwrap();
        let r = exact_decomposition(&m, 0, 1).unwrap();
        assert_eq!((r.label_theta, r.labels, r.residual), (0.0, 0.0, 0.0));
    }

    #[test]
    fn opposite_hypotheses_same_cell() {
        let m = DirichletCategoricalModel::uniform(vec![vec![vec![1.0, 0.0]], vec![vec![0.0, 1.0]]]).unwrap();
        let r = exact_decomposition(&m, 0, 0).unwrap();
        assert_abs_diff_eq!(r.label_theta, LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(r.labels, LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(r.residual, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn independent_cells_keep_everything_in_the_residual() {
        // Cell 1 is the same under every hypothesis.
        let m = DirichletCategoricalModel::uniform(vec![
            vec![vec![0.9, 0.1], vec![0.4, 0.6]],
            vec![vec![0.2, 0.8], vec![0.4, 0.6]],
        ])
        .unwrap();
        let r = exact_decomposition(&m, 0, 1).unwrap();
        assert_abs_diff_eq!(r.labels, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.residual, r.label_theta, epsilon = 1e-15);
    }

    #[test]
    fn small_sweep_passes() {
        let s = decomposition_sweep(20, 3).unwrap();
        assert!(s.passed(), "{s:?}");
        assert_eq!(s.pairs, 320);
    }
}
