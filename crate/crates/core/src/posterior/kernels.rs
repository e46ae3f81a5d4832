use super::{clamp_nonneg, JointDistribution, LabelDistribution};

/// Probabilities at or below this contribute nothing to `-p log p`.
pub const LOG_FLOOR: f64 = 1e-12;

/// `p log p`, with `0 log 0 = 0` and sub-floor probabilities treated as zero.
#[inline]
pub fn xlogx(p: f64) -> f64 {
    if p <= LOG_FLOOR {
        0.0
    } else {
        p * p.ln()
    }
}

/// Shannon entropy of any probability slice, summed in index order.
#[inline]
pub fn entropy_of(p: &[f64]) -> f64 {
    let mut h = 0.0;
    for &v in p {
        h -= xlogx(v);
    }
    clamp_nonneg(h)
}

/// `H(Y)` in nats.
pub fn entropy(d: &LabelDistribution) -> f64 {
    entropy_of(d.probs())
}

/// `H(Y_i, Y_j)` over all `C²` cells.
pub fn joint_entropy(j: &JointDistribution) -> f64 {
    entropy_of(j.probs())
}

/// `H(Y_j | Y_i) = H(Y_i, Y_j) - H(Y_i)`, where `Y_i` is the row variable.
pub fn conditional_entropy(j: &JointDistribution) -> f64 {
    clamp_nonneg(joint_entropy(j) - entropy(&j.row_marginal()))
}

/// `I(Y_i; Y_j) = H(Y_i) + H(Y_j) - H(Y_i, Y_j)`.
pub fn mutual_information(j: &JointDistribution) -> f64 {
    clamp_nonneg(entropy(&j.row_marginal()) + entropy(&j.col_marginal()) - joint_entropy(j))
}
