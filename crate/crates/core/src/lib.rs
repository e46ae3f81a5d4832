//! Bayesian active learning with retraining-free expected error reduction.
//!
//! The crate is organised around the posterior-predictive tensor:
//!
//! - [`posterior`]: the `T × N × C` tensor plus entropy and mutual-information kernels.
//! - [`strategies`]: acquisition scores (MELL, MEZL, BALD, Entropy, Entropy_MC,
//!   Random) and batch selectors (top-k, Coreset, BADGE).
//! - [`models`]: posterior producers: an MC-dropout MLP, an exact finite-support
//!   model, and a closed-form Bayesian linear-Gaussian model.
//! - [`engine`]: the pool-based active-learning loop, data generation, metrics
//!   and result persistence.
//! - [`analysis`]: exact checks of the information identities behind the scores.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod engine;
pub mod models;
pub mod posterior;
pub mod seeding;
pub mod strategies;
