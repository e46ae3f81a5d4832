//! Optimal prediction under log loss.
//!
//! Given `Y_i = y`, the action `a ∈ Δ_C` minimizing `E[−log a_{Y_j} | Y_i = y]`
//! is the conditional `Pr(Y_j = · | Y_i = y)` itself (Gibbs' inequality).

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::posterior::JointDistribution;
use crate::seeding::rng_from;

/// `Σ_c p_c (−log a_c)`; infinite when `a` puts no mass where `p` does.
pub fn expected_log_loss(p: &[f64], a: &[f64]) -> f64 {
    p.iter()
        .zip(a)
        .filter(|(&pc, _)| pc > 0.0)
        .map(|(&pc, &ac)| if ac > 0.0 { -pc * ac.ln() } else { f64::INFINITY })
        .sum()
}

/// Check, for every conditioning value of the row variable, that the
/// conditional predictive loses no more than `1e-9` expected log loss to
/// any of `trials` uniformly drawn simplex points.
pub fn verify_optimal_prediction(joint: &JointDistribution, trials: usize, seed: u64) -> bool {
    let c = joint.classes();
    let mut rng = rng_from(seed);
    let mut alt = vec![0.0; c];
    for y in 0..c {
        let Some(cond) = joint.conditional_given_row(y) else { continue };
        let best = expected_log_loss(&cond, &cond);
        for _ in 0..trials {
            // Normalized exponentials are uniform on the simplex.
            let mut total = 0.0;
            for v in alt.iter_mut() {
                *v = Exp1.sample(&mut rng);
                total += *v;
            }
            alt.iter_mut().for_each(|v| *v /= total);
            if best > expected_log_loss(&cond, &alt) + 1e-9 {
                return false;
            }
        }
        // also try small perturbations of the optimum
        for _ in 0..trials.min(16) {
            let eps = rng.random::<f64>() * 1e-3;
            let mut total = 0.0;
            for (v, &p) in alt.iter_mut().zip(&cond) {
                *v = p + eps * rng.random::<f64>();
                total += *v;
            }
            alt.iter_mut().for_each(|v| *v /= total);
            if best > expected_log_loss(&cond, &alt) + 1e-9 {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn holds_on_a_fixed_joint() {
        let j =
            JointDistribution::from_rows(&[vec![0.1, 0.2, 0.05], vec![0.3, 0.05, 0.1], vec![0.0, 0.1, 0.1]]).unwrap();
        assert!(verify_optimal_prediction(&j, 1000, 1));
    }

    #[test]
    fn perturbed_action_loses() {
        let p = [0.7, 0.3];
        assert!(expected_log_loss(&p, &[0.6, 0.4]) > expected_log_loss(&p, &p));
    }

    #[test]
    fn point_mass_has_zero_loss() {
        let j = JointDistribution::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let cond = j.conditional_given_row(0).unwrap();
        assert_eq!(expected_log_loss(&cond, &cond), 0.0);
        assert!(verify_optimal_prediction(&j, 100, 2));
    }
}
