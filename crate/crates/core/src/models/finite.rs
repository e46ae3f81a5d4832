//! Finite-support posterior over label tables.
//!
//! The input space is a handful of discrete cells. Each hypothesis `θ_m` is a
//! full table `Pr(Y = c | cell, θ_m)` and carries posterior weight `w_m`, so
//! every predictive, joint and information quantity is an exact finite sum.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::{ModelError, Result};
use crate::posterior::{entropy_of, JointDistribution, LabelDistribution, PosteriorTensor, SUM_TOLERANCE};
use crate::seeding::rng_from;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletCategoricalModel {
    /// `tables[m][cell][c]`
    tables: Vec<Vec<Vec<f64>>>,
    weights: Vec<f64>,
}

impl DirichletCategoricalModel {
    pub fn new(tables: Vec<Vec<Vec<f64>>>, weights: Vec<f64>) -> Result<Self> {
        if tables.is_empty() || tables.len() != weights.len() {
            return Err(ModelError::InvalidParameter(format!("{} tables but {} weights", tables.len(), weights.len())));
        }
        let cells = tables[0].len();
        let classes = tables[0].first().map_or(0, Vec::len);
        if cells == 0 || classes == 0 {
            return Err(ModelError::InvalidParameter("empty table".into()));
        }
        for table in &tables {
            if table.len() != cells || table.iter().any(|row| row.len() != classes) {
                return Err(ModelError::Shape("hypothesis tables differ in shape".into()));
            }
            for row in table {
                let sum: f64 = row.iter().sum();
                if row.iter().any(|p| !(0.0..=1.0).contains(p)) || (sum - 1.0).abs() > SUM_TOLERANCE {
                    return Err(ModelError::InvalidParameter(format!("table row {row:?} is not a distribution")));
                }
            }
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(0.0..=1.0).contains(w)) || (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(ModelError::InvalidParameter(format!("weights {weights:?} do not sum to 1")));
        }
        Ok(Self { tables, weights })
    }

    /// Equal weights over `tables`.
    pub fn uniform(tables: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let m = tables.len().max(1);
        Self::new(tables, vec![1.0 / m as f64; m])
    }

    /// Random model: table rows drawn from `Dirichlet(α)`, weights from
    /// `Dirichlet(1)`.
    pub fn random(cells: usize, classes: usize, hypotheses: usize, alpha: f64, seed: u64) -> Result<Self> {
        if cells == 0 || classes == 0 || hypotheses == 0 || !(alpha > 0.0) {
            return Err(ModelError::InvalidParameter("need positive sizes and alpha".into()));
        }
        let mut rng = rng_from(seed);
        let gamma = Gamma::new(alpha, 1.0).map_err(|e| ModelError::InvalidParameter(e.to_string()))?;
        let unit = Gamma::new(1.0, 1.0).expect("valid shape");
        let draw = |g: &Gamma<f64>, k: usize, rng: &mut rand_chacha::ChaCha8Rng| {
            let mut v: Vec<f64> = (0..k).map(|_| g.sample(rng).max(f64::MIN_POSITIVE)).collect();
            let s: f64 = v.iter().sum();
            v.iter_mut().for_each(|x| *x /= s);
            v
        };
        let tables = (0..hypotheses).map(|_| (0..cells).map(|_| draw(&gamma, classes, &mut rng)).collect()).collect();
        let weights = draw(&unit, hypotheses, &mut rng);
        Self::new(tables, weights)
    }

    pub fn hypotheses(&self) -> usize {
        self.tables.len()
    }

    pub fn cells(&self) -> usize {
        self.tables[0].len()
    }

    pub fn classes(&self) -> usize {
        self.tables[0][0].len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn table(&self, m: usize) -> &[Vec<f64>] {
        &self.tables[m]
    }

    /// `Pr(Y = c | cell, θ_m)`.
    pub fn likelihood(&self, m: usize, cell: usize, c: usize) -> f64 {
        self.tables[m][cell][c]
    }

    fn check_cell(&self, cell: usize) -> Result<()> {
        if cell >= self.cells() {
            return Err(ModelError::OutOfRange { cell, cells: self.cells() });
        }
        Ok(())
    }

    /// `Σ_m w_m Pr(Y = c | cell, θ_m)`.
    pub fn exact_predictive(&self, cell: usize) -> Result<LabelDistribution> {
        self.check_cell(cell)?;
        let mut p = vec![0.0; self.classes()];
        for (table, &w) in self.tables.iter().zip(&self.weights) {
            p.iter_mut().zip(&table[cell]).for_each(|(acc, &q)| *acc += w * q);
        }
        Ok(LabelDistribution::new(p)?)
    }

    /// `Σ_m w_m p_m(c | i) p_m(c' | j)`, rows indexing `Y_i`.
    pub fn exact_pairwise_joint(&self, cell_i: usize, cell_j: usize) -> Result<JointDistribution> {
        self.check_cell(cell_i)?;
        self.check_cell(cell_j)?;
        let c = self.classes();
        let mut p = vec![0.0; c * c];
        for (table, &w) in self.tables.iter().zip(&self.weights) {
            for (a, &pa) in table[cell_i].iter().enumerate() {
                for (b, &pb) in table[cell_j].iter().enumerate() {
                    p[a * c + b] += w * pa * pb;
                }
            }
        }
        Ok(JointDistribution::new(c, p)?)
    }

    /// Posterior after observing `label` at `cell`.
    pub fn bayes_update(&self, cell: usize, label: usize) -> Result<Self> {
        self.check_cell(cell)?;
        if label >= self.classes() {
            return Err(ModelError::InvalidLabel { label, classes: self.classes() });
        }
        let unnorm: Vec<f64> = self.tables.iter().zip(&self.weights).map(|(t, &w)| w * t[cell][label]).collect();
        let z: f64 = unnorm.iter().sum();
        if z <= 0.0 {
            return Err(ModelError::ImpossibleObservation);
        }
        Ok(Self { tables: self.tables.clone(), weights: unnorm.into_iter().map(|u| u / z).collect() })
    }

    /// Monte Carlo tensor over `cells`: `samples` hypotheses drawn i.i.d. by weight.
    pub fn sample_tensor(&self, cells: &[usize], samples: usize, seed: u64) -> Result<PosteriorTensor> {
        for &cell in cells {
            self.check_cell(cell)?;
        }
        if samples == 0 {
            return Err(ModelError::InvalidParameter("need at least one sample".into()));
        }
        let mut cdf = Vec::with_capacity(self.weights.len());
        let mut acc = 0.0;
        for &w in &self.weights {
            acc += w;
            cdf.push(acc);
        }
        let mut rng = rng_from(seed);
        let mut buf = Vec::with_capacity(samples * cells.len() * self.classes());
        for _ in 0..samples {
            let u = rng.random::<f64>() * acc;
            let m = cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1);
            for &cell in cells {
                buf.extend_from_slice(&self.tables[m][cell]);
            }
        }
        Ok(PosteriorTensor::new(samples, cells.len(), self.classes(), buf)?)
    }

    /// Exact MELL, `n_val · H(Y_i) − Σ_j H(Y_j, Y_i)`, for each candidate cell.
    pub fn exact_mell(&self, pool: &[usize], val: &[usize]) -> Result<Vec<f64>> {
        pool.iter()
            .map(|&i| {
                let h_i = entropy_of(self.exact_predictive(i)?.probs());
                let mut total = val.len() as f64 * h_i;
                for &j in val {
                    total -= entropy_of(self.exact_pairwise_joint(i, j)?.probs());
                }
                Ok(total)
            })
            .collect()
    }

    /// Exact MEZL, `Σ_j Σ_c max_c' Pr(Y_j = c', Y_i = c)`.
    pub fn exact_mezl(&self, pool: &[usize], val: &[usize]) -> Result<Vec<f64>> {
        let c = self.classes();
        pool.iter()
            .map(|&i| {
                let mut total = 0.0;
                for &j in val {
                    let joint = self.exact_pairwise_joint(i, j)?;
                    for row in joint.probs().chunks(c) {
                        total += row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    }
                }
                Ok(total)
            })
            .collect()
    }

    /// Exact BALD, `H(Σ_m w_m p_m) − Σ_m w_m H(p_m)`.
    pub fn exact_bald(&self, pool: &[usize]) -> Result<Vec<f64>> {
        pool.iter()
            .map(|&i| {
                let total = entropy_of(self.exact_predictive(i)?.probs());
                let aleatoric: f64 = self.tables.iter().zip(&self.weights).map(|(t, &w)| w * entropy_of(&t[i])).sum();
                Ok((total - aleatoric).max(0.0))
            })
            .collect()
    }
}
