//! Posterior-predictive tensors and the entropy / mutual-information kernels
//! computed from them.
//!
//! Everything downstream (acquisition scores, analyses) is a function of a
//! [`PosteriorTensor`]: `T` posterior parameter draws, `N` data points and
//! `C` classes, stored sample-major as `[t][i][c]`. Marginals and pairwise
//! joints are the Monte Carlo averages
//!
//! ```text
//! Pr(Y_i = c)            ≈ 1/T Σ_t Pr(Y_i = c | θ_t)
//! Pr(Y_i = c, Y_j = c')  ≈ 1/T Σ_t Pr(Y_i = c | θ_t) Pr(Y_j = c' | θ_t)
//! ```
//!
//! where the factorization in the second line uses the conditional
//! independence of labels given the parameters.
//!
//! All information quantities are in nats.

mod dump;
mod kernels;
mod tensor;

pub use dump::{read_tensor, write_tensor, DUMP_MAGIC};
pub use kernels::{conditional_entropy, entropy, entropy_of, joint_entropy, mutual_information, xlogx, LOG_FLOOR};
pub use tensor::{argmax, JointDistribution, LabelDistribution, PosteriorTensor, Violation};

use thiserror::Error;

/// Tolerance on row sums of probability vectors.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Negative information values with magnitude below this are float noise and
/// are clamped to zero.
pub const NEGATIVE_CLAMP: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum PosteriorError {
    #[error("point index {index} out of range for {len} points")]
    OutOfRange { index: usize, len: usize },

    #[error("invalid posterior tensor: {0}")]
    Invalid(Violation),

    #[error("shape mismatch: expected {expected} values, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("invalid distribution: {0}")]
    Distribution(String),

    #[error("tensor dump: {0}")]
    Dump(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PosteriorError>;

/// Clamp tiny negative information values produced by cancellation.
///
/// Values below `-NEGATIVE_CLAMP` cannot come from valid distributions and
/// trip a debug assertion.
#[inline]
pub(crate) fn clamp_nonneg(x: f64) -> f64 {
    debug_assert!(x > -NEGATIVE_CLAMP, "information quantity {x} is negative");
    x.max(0.0)
}
