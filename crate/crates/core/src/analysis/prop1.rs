//! Label-label information stays bounded while label-parameter information
//! grows without limit.
//!
//! For the linear-Gaussian model `I(Y_x; Y_v) ≤ −½ log(1 − vᵀΣv / (vᵀΣv + σ²))`
//! whatever `x` is, and the mean over validation points is at most
//! `C = E_v[vᵀΣv] / (2σ²)`. `I(Y_x; θ)` grows like `log ‖x‖`.

use ndarray::Array1;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{AnalysisError, Check, Result};
use crate::models::BayesianLinearGaussian;
use crate::seeding::rng_from;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop1Row {
    pub s: f64,
    pub mean_mi_labels: f64,
    pub bound_c: f64,
    pub mi_label_theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop1Report {
    pub direction: Vec<f64>,
    pub rows: Vec<Prop1Row>,
    pub violations: usize,
    /// `I(Y;θ)` at the largest norm minus at the smallest.
    pub growth: f64,
    pub checks: Vec<Check>,
}

impl Prop1Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Evaluate the bound at candidates `s · direction` for each `s` in `norms`.
pub fn prop1_sweep(
    model: &BayesianLinearGaussian,
    val: &[Array1<f64>],
    direction: &Array1<f64>,
    norms: &[f64],
) -> Result<Prop1Report> {
    if norms.is_empty() || norms.iter().any(|s| !(*s > 0.0)) || norms.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AnalysisError::Invalid("norms must be positive and increasing".into()));
    }
    let bound_c = model.bound_c(val)?;
    let mut rows = Vec::with_capacity(norms.len());
    for &s in norms {
        let x = direction * s;
        let d = model.decomposition(x.view(), val)?;
        rows.push(Prop1Row { s, mean_mi_labels: d.labels, bound_c, mi_label_theta: d.label_theta });
    }
    let violations = rows.iter().filter(|r| r.mean_mi_labels > r.bound_c).count();
    let growth = rows[rows.len() - 1].mi_label_theta - rows[0].mi_label_theta;
    let checks = vec![Check::at_most("bound violations", violations as f64, 0.0)];
    Ok(Prop1Report { direction: direction.to_vec(), rows, violations, growth, checks })
}

/// `n` points from `N(0, I_dim)`.
pub fn standard_normal_points(n: usize, dim: usize, seed: u64) -> Vec<Array1<f64>> {
    let mut rng = rng_from(seed);
    (0..n).map(|_| Array1::from_shape_fn(dim, |_| StandardNormal.sample(&mut rng))).collect()
}

/// `Σ = I₂`, `σ² = 1`, 100 standard-normal validation points, unit direction
/// `(0.6, 0.8)`, `s ∈ {1, 10, …, 10⁴}`. Also requires 8 nats of growth.
pub fn default_prop1(seed: u64) -> Result<Prop1Report> {
    let model = BayesianLinearGaussian::isotropic(2, 1.0)?;
    let val = standard_normal_points(100, 2, seed);
    let u = Array1::from(vec![0.6, 0.8]);
    let mut report = prop1_sweep(&model, &val, &u, &[1.0, 1e1, 1e2, 1e3, 1e4])?;
    report.checks.push(Check::at_least("I(Y;θ) growth", report.growth, 8.0));
    Ok(report)
}
