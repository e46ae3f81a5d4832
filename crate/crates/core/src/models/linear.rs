//! Bayesian linear regression `Y = θᵀx + ε`, `θ ~ N(μ, Σ)`, `ε ~ N(0, σ²)`.
//!
//! Labels at any set of inputs are jointly Gaussian, so every information
//! quantity has a closed form in nats. The prior mean never enters.

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use super::{ModelError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesianLinearGaussian {
    mean: Array1<f64>,
    cov: Array2<f64>,
    noise: f64,
}

/// `I(Y_x; θ)`, the mean over validation points of `I(Y_x; Y_v)`, and the
/// remainder attributed to `I(Y_x; θ | Y_v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearDecomposition {
    pub label_theta: f64,
    pub labels: f64,
    pub residual: f64,
}

impl BayesianLinearGaussian {
    pub fn new(mean: Array1<f64>, cov: Array2<f64>, noise: f64) -> Result<Self> {
        let d = mean.len();
        if cov.dim() != (d, d) {
            return Err(ModelError::Shape(format!("covariance is {:?}, mean has {d} entries", cov.dim())));
        }
        if !(noise > 0.0 && noise.is_finite()) {
            return Err(ModelError::InvalidParameter(format!("noise variance {noise} must be positive")));
        }
        for a in 0..d {
            for b in 0..a {
                if (cov[[a, b]] - cov[[b, a]]).abs() > 1e-12 * (1.0 + cov[[a, b]].abs()) {
                    return Err(ModelError::InvalidParameter("covariance is not symmetric".into()));
                }
            }
        }
        cholesky(&cov).ok_or_else(|| ModelError::InvalidParameter("covariance is not positive definite".into()))?;
        Ok(Self { mean, cov, noise })
    }

    /// Zero mean, identity covariance.
    pub fn isotropic(dim: usize, noise: f64) -> Result<Self> {
        Self::new(Array1::zeros(dim), Array2::eye(dim), noise)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    fn check(&self, x: &ArrayView1<'_, f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(ModelError::Shape(format!("input has {} entries, model has {}", x.len(), self.dim())));
        }
        Ok(())
    }

    fn quad(&self, x: &ArrayView1<'_, f64>, v: &ArrayView1<'_, f64>) -> f64 {
        x.dot(&self.cov.dot(v))
    }

    /// `½ log(xᵀΣx + σ²) − ½ log σ²`.
    pub fn mi_label_theta(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        self.check(&x)?;
        // ln_1p keeps precision when xᵀΣx is tiny relative to σ².
        Ok(0.5 * (self.quad(&x, &x) / self.noise).ln_1p())
    }

    /// Correlation of `Y_x` and `Y_v`.
    pub fn correlation(&self, x: ArrayView1<'_, f64>, v: ArrayView1<'_, f64>) -> Result<f64> {
        self.check(&x)?;
        self.check(&v)?;
        let num = self.quad(&x, &v);
        let den = ((self.quad(&x, &x) + self.noise) * (self.quad(&v, &v) + self.noise)).sqrt();
        Ok((num / den).clamp(-1.0, 1.0))
    }

    /// `−½ log(1 − r²)`; `+∞` only if `|r| = 1`.
    pub fn mi_labels(&self, x: ArrayView1<'_, f64>, v: ArrayView1<'_, f64>) -> Result<f64> {
        let r = self.correlation(x, v)?;
        Ok(-0.5 * (-r * r).ln_1p())
    }

    /// `C = E_v[vᵀΣv] / (2σ²)` over `val`.
    pub fn bound_c(&self, val: &[Array1<f64>]) -> Result<f64> {
        if val.is_empty() {
            return Err(ModelError::Empty);
        }
        let mut total = 0.0;
        for v in val {
            self.check(&v.view())?;
            total += self.quad(&v.view(), &v.view());
        }
        Ok(total / val.len() as f64 / (2.0 * self.noise))
    }

    pub fn decomposition(&self, x: ArrayView1<'_, f64>, val: &[Array1<f64>]) -> Result<LinearDecomposition> {
        if val.is_empty() {
            return Err(ModelError::Empty);
        }
        let label_theta = self.mi_label_theta(x)?;
        let mut labels = 0.0;
        for v in val {
            labels += self.mi_labels(x, v.view())?;
        }
        labels /= val.len() as f64;
        Ok(LinearDecomposition { label_theta, labels, residual: label_theta - labels })
    }
}

/// Lower Cholesky factor, or `None` if `a` is not positive definite.
fn cholesky(a: &Array2<f64>) -> Option<Array2<f64>> {
    let n = a.nrows();
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[[i, k]] * l[[j, k]]).sum();
            if i == j {
                let d = a[[i, i]] - s;
                if !(d > 0.0) {
                    return None;
                }
                l[[i, j]] = d.sqrt();
            } else {
                l[[i, j]] = (a[[i, j]] - s) / l[[j, j]];
            }
        }
    }
    Some(l)
}
