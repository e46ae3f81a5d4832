//! Posterior-predictive producers.
//!
//! - [`DropoutMlp`]: a from-scratch MLP whose posterior draws are dropout masks.
//! - [`DirichletCategoricalModel`]: a finite set of label tables with exact
//!   Bayesian weights, used as an oracle for the Monte Carlo estimators.
//! - [`BayesianLinearGaussian`]: closed-form information quantities for a
//!   linear model with Gaussian prior and noise.

mod finite;
mod linear;
mod mlp;

pub use finite::DirichletCategoricalModel;
pub use linear::{BayesianLinearGaussian, LinearDecomposition};
pub use mlp::{DropoutMlp, MlpCheckpoint, MlpConfig, CHECKPOINT_VERSION};

use ndarray::{Array2, ArrayView2};
use thiserror::Error;

use crate::posterior::{PosteriorError, PosteriorTensor};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("label {label} out of range for {classes} classes")]
    InvalidLabel { label: usize, classes: usize },

    #[error("no training samples")]
    Empty,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("training diverged: non-finite loss at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cell {cell} out of range for {cells} cells")]
    OutOfRange { cell: usize, cells: usize },

    #[error("observation has zero likelihood under every hypothesis")]
    ImpossibleObservation,

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Posterior(#[from] PosteriorError),
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// A classifier that can produce posterior-predictive draws.
///
/// Identical inputs and seeds must give identical outputs.
pub trait BayesianClassifier {
    fn classes(&self) -> usize;

    fn fit(&mut self, features: ArrayView2<'_, f64>, labels: &[usize]) -> Result<()>;

    /// `samples` posterior draws over every row of `features`.
    fn posterior_predictive(&self, features: ArrayView2<'_, f64>, samples: usize, seed: u64)
        -> Result<PosteriorTensor>;

    /// Predictive under the point estimate of the parameters.
    fn point_predictive(&self, features: ArrayView2<'_, f64>) -> Array2<f64>;

    /// Penultimate-layer representation, if the model has one.
    fn embeddings(&self, features: ArrayView2<'_, f64>) -> Option<Array2<f64>>;
}
