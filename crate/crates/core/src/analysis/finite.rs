//! Exact information quantities on finite-support posteriors.
//!
//! A [`FiniteLabelModel`] is a weighted set of hypotheses, each giving an
//! independent label distribution per point. Every joint over a few labels is
//! then an explicit finite sum and needs no Monte Carlo.

use super::{AnalysisError, Result};
use crate::models::DirichletCategoricalModel;
use crate::posterior::{entropy_of, PosteriorTensor};

/// Largest number of label assignments enumerated for one joint.
pub const MAX_ASSIGNMENTS: usize = 1 << 16;

pub trait FiniteLabelModel {
    fn hypotheses(&self) -> usize;
    fn weight(&self, h: usize) -> f64;
    fn points(&self) -> usize;
    fn classes(&self) -> usize;
    /// `Pr(Y_point = c | θ_h)`.
    fn likelihood(&self, h: usize, point: usize, c: usize) -> f64;
}

impl FiniteLabelModel for DirichletCategoricalModel {
    fn hypotheses(&self) -> usize {
        DirichletCategoricalModel::hypotheses(self)
    }
    fn weight(&self, h: usize) -> f64 {
        self.weights()[h]
    }
    fn points(&self) -> usize {
        self.cells()
    }
    fn classes(&self) -> usize {
        DirichletCategoricalModel::classes(self)
    }
    fn likelihood(&self, h: usize, point: usize, c: usize) -> f64 {
        DirichletCategoricalModel::likelihood(self, h, point, c)
    }
}

/// Each posterior draw is a hypothesis with weight `1/T`.
impl FiniteLabelModel for PosteriorTensor {
    fn hypotheses(&self) -> usize {
        self.samples()
    }
    fn weight(&self, _h: usize) -> f64 {
        1.0 / self.samples() as f64
    }
    fn points(&self) -> usize {
        PosteriorTensor::points(self)
    }
    fn classes(&self) -> usize {
        PosteriorTensor::classes(self)
    }
    fn likelihood(&self, h: usize, point: usize, c: usize) -> f64 {
        self.row(h, point)[c]
    }
}

/// A model with its hypothesis weights replaced, e.g. after conditioning.
#[derive(Debug, Clone)]
pub struct Reweighted<'a, M: ?Sized> {
    base: &'a M,
    weights: Vec<f64>,
}

impl<M: FiniteLabelModel + ?Sized> FiniteLabelModel for Reweighted<'_, M> {
    fn hypotheses(&self) -> usize {
        self.weights.len()
    }
    fn weight(&self, h: usize) -> f64 {
        self.weights[h]
    }
    fn points(&self) -> usize {
        self.base.points()
    }
    fn classes(&self) -> usize {
        self.base.classes()
    }
    fn likelihood(&self, h: usize, point: usize, c: usize) -> f64 {
        self.base.likelihood(h, point, c)
    }
}

fn check_points<M: FiniteLabelModel + ?Sized>(model: &M, idx: &[usize]) -> Result<()> {
    match idx.iter().find(|&&i| i >= model.points()) {
        Some(&index) => Err(AnalysisError::OutOfRange { index, len: model.points() }),
        None => Ok(()),
    }
}

/// Posterior over hypotheses after observing `Y_point = label`.
pub fn condition<M: FiniteLabelModel + ?Sized>(model: &M, point: usize, label: usize) -> Result<Reweighted<'_, M>> {
    check_points(model, &[point])?;
    let mut weights: Vec<f64> =
        (0..model.hypotheses()).map(|h| model.weight(h) * model.likelihood(h, point, label)).collect();
    let z: f64 = weights.iter().sum();
    if !(z > 0.0) {
        return Err(AnalysisError::Invalid(format!("Y_{point} = {label} has zero probability")));
    }
    weights.iter_mut().for_each(|w| *w /= z);
    Ok(Reweighted { base: model, weights })
}

/// Joint distribution of `Y_points`, flattened with the first point most
/// significant.
pub fn joint_of<M: FiniteLabelModel + ?Sized>(model: &M, points: &[usize]) -> Result<Vec<f64>> {
    check_points(model, points)?;
    let c = model.classes();
    let size = c
        .checked_pow(points.len() as u32)
        .filter(|&s| s <= MAX_ASSIGNMENTS)
        .ok_or_else(|| AnalysisError::TooLarge(format!("{c}^{} label assignments", points.len())))?;
    let mut joint = vec![0.0; size];
    let mut per_h = vec![0.0; size];
    for h in 0..model.hypotheses() {
        let w = model.weight(h);
        if w == 0.0 {
            continue;
        }
        per_h.truncate(1);
        per_h[0] = w;
        for &p in points {
            let mut next = Vec::with_capacity(per_h.len() * c);
            for &prev in &per_h {
                for k in 0..c {
                    next.push(prev * model.likelihood(h, p, k));
                }
            }
            per_h = next;
        }
        joint.iter_mut().zip(&per_h).for_each(|(j, v)| *j += v);
    }
    Ok(joint)
}

pub fn marginal<M: FiniteLabelModel + ?Sized>(model: &M, point: usize) -> Result<Vec<f64>> {
    joint_of(model, &[point])
}

/// `H(Y_points)`; zero for the empty set.
pub fn joint_entropy_of<M: FiniteLabelModel + ?Sized>(model: &M, points: &[usize]) -> Result<f64> {
    Ok(entropy_of(&joint_of(model, points)?))
}

/// `I(Y_i; θ) = H(Y_i) − Σ_h w_h H(Y_i | θ_h)`.
pub fn mi_label_theta<M: FiniteLabelModel + ?Sized>(model: &M, i: usize) -> Result<f64> {
    let total = entropy_of(&marginal(model, i)?);
    let mut row = vec![0.0; model.classes()];
    let mut aleatoric = 0.0;
    for h in 0..model.hypotheses() {
        row.iter_mut().enumerate().for_each(|(c, r)| *r = model.likelihood(h, i, c));
        aleatoric += model.weight(h) * entropy_of(&row);
    }
    Ok((total - aleatoric).max(0.0))
}

/// `I(Y_i; Y_j) = H(Y_i) + H(Y_j) − H(Y_i, Y_j)`.
pub fn mi_labels<M: FiniteLabelModel + ?Sized>(model: &M, i: usize, j: usize) -> Result<f64> {
    let hi = joint_entropy_of(model, &[i])?;
    let hj = joint_entropy_of(model, &[j])?;
    let hij = joint_entropy_of(model, &[i, j])?;
    Ok((hi + hj - hij).max(0.0))
}

/// `I(Y_i; θ | Y_j) = Σ_y Pr(Y_j = y) · I(Y_i; θ | Y_j = y)`, evaluated on the
/// conditioned posteriors.
pub fn mi_label_theta_given<M: FiniteLabelModel + ?Sized>(model: &M, i: usize, j: usize) -> Result<f64> {
    let pj = marginal(model, j)?;
    let mut total = 0.0;
    for (y, &p) in pj.iter().enumerate() {
        if p > 0.0 {
            total += p * mi_label_theta(&condition(model, j, y)?, i)?;
        }
    }
    Ok(total)
}

/// MELL in information form, `Σ_j I(Y_i; Y_j)`.
pub fn mell_scores<M: FiniteLabelModel + ?Sized>(model: &M, pool: &[usize], val: &[usize]) -> Result<Vec<f64>> {
    pool.iter().map(|&i| val.iter().map(|&j| mi_labels(model, i, j)).sum()).collect()
}

/// MEZL, `Σ_j Σ_c max_c' Pr(Y_j = c', Y_i = c)`.
pub fn mezl_scores<M: FiniteLabelModel + ?Sized>(model: &M, pool: &[usize], val: &[usize]) -> Result<Vec<f64>> {
    let c = model.classes();
    pool.iter()
        .map(|&i| {
            let mut total = 0.0;
            for &j in val {
                // rows index Y_i
                let joint = joint_of(model, &[i, j])?;
                for row in joint.chunks(c) {
                    total += row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                }
            }
            Ok(total)
        })
        .collect()
}

pub fn bald_scores<M: FiniteLabelModel + ?Sized>(model: &M, pool: &[usize]) -> Result<Vec<f64>> {
    pool.iter().map(|&i| mi_label_theta(model, i)).collect()
}

/// Predictive entropy `H(Y_i)`.
pub fn entropy_scores<M: FiniteLabelModel + ?Sized>(model: &M, pool: &[usize]) -> Result<Vec<f64>> {
    pool.iter().map(|&i| joint_entropy_of(model, &[i])).collect()
}

/// `f(B) = Σ_v H(Y_v | Y_B)`.
pub fn batch_objective<M: FiniteLabelModel + ?Sized>(model: &M, batch: &[usize], val: &[usize]) -> Result<f64> {
    let h_b = joint_entropy_of(model, batch)?;
    let mut total = 0.0;
    for &v in val {
        let mut with_v = batch.to_vec();
        with_v.push(v);
        total += (joint_entropy_of(model, &with_v)? - h_b).max(0.0);
    }
    Ok(total)
}
