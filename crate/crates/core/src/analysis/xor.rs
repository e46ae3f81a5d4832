//! Pool bits whose only value is jointly.
//!
//! `m` uniform independent bits, and a validation label equal to the XOR of a
//! subset `S`. No single bit tells anything about the validation label, so
//! every one-step score is flat; once one bit of `S` is known its partner is
//! worth a full bit.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::finite::{
    bald_scores, batch_objective, condition, entropy_scores, mell_scores, mezl_scores, FiniteLabelModel,
};
use super::{AnalysisError, Check, Result};

/// Largest enumerable number of pool bits.
pub const MAX_BITS: usize = 20;

/// Hypotheses are the `2^m` joint assignments of the pool bits, uniformly
/// weighted, so `θ` is the full joint label table. Points `0..m` are the pool
/// bits; point `m` is the validation label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XorInstance {
    m: usize,
    subset: Vec<usize>,
    mask: u64,
}

impl XorInstance {
    pub fn new(m: usize, subset: Vec<usize>) -> Result<Self> {
        if m > MAX_BITS {
            return Err(AnalysisError::TooLarge(format!("{m} pool bits (at most {MAX_BITS})")));
        }
        let mut subset = subset;
        subset.sort_unstable();
        subset.dedup();
        if subset.len() < 2 {
            return Err(AnalysisError::Invalid("XOR subset needs at least 2 bits".into()));
        }
        if let Some(&index) = subset.iter().find(|&&s| s >= m) {
            return Err(AnalysisError::OutOfRange { index, len: m });
        }
        let mask = subset.iter().fold(0u64, |acc, &s| acc | 1 << s);
        Ok(Self { m, subset, mask })
    }

    pub fn bits(&self) -> usize {
        self.m
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn pool(&self) -> Vec<usize> {
        (0..self.m).collect()
    }

    pub fn val(&self) -> usize {
        self.m
    }

    fn label(&self, h: usize, point: usize) -> usize {
        let h = h as u64;
        if point == self.m {
            ((h & self.mask).count_ones() % 2) as usize
        } else {
            ((h >> point) & 1) as usize
        }
    }
}

impl FiniteLabelModel for XorInstance {
    fn hypotheses(&self) -> usize {
        1 << self.m
    }
    fn weight(&self, _h: usize) -> f64 {
        (-(self.m as f64)).exp2()
    }
    fn points(&self) -> usize {
        self.m + 1
    }
    fn classes(&self) -> usize {
        2
    }
    fn likelihood(&self, h: usize, point: usize, c: usize) -> f64 {
        if self.label(h, point) == c {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XorScores {
    pub mell: Vec<f64>,
    pub mezl: Vec<f64>,
    pub bald: Vec<f64>,
    pub entropy: Vec<f64>,
}

impl XorScores {
    pub fn spreads(&self) -> [(&'static str, f64); 4] {
        [
            ("mell", spread(&self.mell)),
            ("mezl", spread(&self.mezl)),
            ("bald", spread(&self.bald)),
            ("entropy", spread(&self.entropy)),
        ]
    }
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

/// One-step scores of every pool bit against the validation label.
pub fn xor_scores<M: FiniteLabelModel + ?Sized>(model: &M, pool: &[usize], val: usize) -> Result<XorScores> {
    Ok(XorScores {
        mell: mell_scores(model, pool, &[val])?,
        mezl: mezl_scores(model, pool, &[val])?,
        bald: bald_scores(model, pool)?,
        entropy: entropy_scores(model, pool)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub e: usize,
    /// `f(A) − f(A ∪ {e})`
    pub gain_a: f64,
    /// `f(B) − f(B ∪ {e})`
    pub gain_b: f64,
}

impl Witness {
    /// A submodular reduction would have `gain_a ≥ gain_b`.
    pub fn violates(&self) -> bool {
        self.gain_b > self.gain_a
    }
}

/// `A = ∅`, `B = {Y₁}`, `e = Y₂` on the instance with 2 bits and `S = {Y₁, Y₂}`.
pub fn nonsubmodularity_witness() -> Result<Witness> {
    let x = XorInstance::new(2, vec![0, 1])?;
    let val = [x.val()];
    let f = |b: &[usize]| batch_objective(&x, b, &val);
    let (a, b, e) = (vec![], vec![0], 1);
    let gain_a = f(&a)? - f(&[e])?;
    let gain_b = f(&b)? - f(&[0, e])?;
    Ok(Witness { a, b, e, gain_a, gain_b })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XorReport {
    pub instance: XorInstance,
    pub scores: XorScores,
    /// MELL after observing the first subset bit as 0.
    pub two_step_mell: Vec<f64>,
    pub partner: usize,
    pub objective_empty: f64,
    pub objective_first: f64,
    pub objective_pair: f64,
    pub witness: Witness,
    pub checks: Vec<Check>,
}

impl XorReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Scores, two-step adaptivity and batch objective on `m` bits with the
/// validation label `Y₁ XOR Y₂`.
pub fn xor_report(m: usize) -> Result<XorReport> {
    let x = XorInstance::new(m, vec![0, 1])?;
    let pool = x.pool();
    let val = x.val();
    let scores = xor_scores(&x, &pool, val)?;

    let (first, partner) = (x.subset()[0], x.subset()[1]);
    let after = condition(&x, first, 0)?;
    let two_step_mell = mell_scores(&after, &pool, &[val])?;
    let others = pool.iter().filter(|&&p| p != partner).map(|&p| two_step_mell[p]).fold(0.0, f64::max);

    let objective_empty = batch_objective(&x, &[], &[val])?;
    let objective_first = batch_objective(&x, &[first], &[val])?;
    let objective_pair = batch_objective(&x, &[first, partner], &[val])?;
    let witness = nonsubmodularity_witness()?;

    let mut checks: Vec<Check> = scores
        .spreads()
        .into_iter()
        .map(|(name, s)| Check::at_most(&format!("{name} score spread"), s, 1e-12))
        .collect();
    checks.extend([
        Check::within("entropy of a pool bit", scores.entropy[0], LN_2, 1e-12),
        Check::within("two-step MELL of partner", two_step_mell[partner], LN_2, 1e-9),
        Check::at_most("two-step MELL of others", others, 1e-12),
        Check::within("f(∅)", objective_empty, LN_2, 1e-12),
        Check::within("f({Y1})", objective_first, LN_2, 1e-12),
        Check::within("f({Y1,Y2})", objective_pair, 0.0, 1e-12),
        Check::within("gain(e | ∅)", witness.gain_a, 0.0, 1e-12),
        Check::within("gain(e | {Y1})", witness.gain_b, LN_2, 1e-12),
        Check::at_least("witness violation", witness.gain_b - witness.gain_a, 0.5),
    ]);
    Ok(XorReport {
        instance: x,
        scores,
        two_step_mell,
        partner,
        objective_empty,
        objective_first,
        objective_pair,
        witness,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn labels_and_sizes() {
        let x = XorInstance::new(3, vec![2, 0]).unwrap();
        assert_eq!(x.subset(), &[0, 2]);
        assert_eq!(x.label(0b101, 3), 0);
        assert_eq!(x.label(0b100, 3), 1);
        assert_eq!(x.label(0b100, 2), 1);
        assert!(matches!(XorInstance::new(21, vec![0, 1]), Err(AnalysisError::TooLarge(_))));
        assert!(XorInstance::new(3, vec![1]).is_err());
        assert!(XorInstance::new(3, vec![1, 3]).is_err());
    }

    #[test]
    fn ten_bit_report() {
        let r = xor_report(10).unwrap();
        assert!(r.passed(), "{:#?}", r.checks);
        assert!(r.scores.mell.iter().all(|&s| s.abs() < 1e-12));
        assert!(r.scores.bald.iter().all(|&s| (s - LN_2).abs() < 1e-12));
        assert!(r.scores.mezl.iter().all(|&s| (s - 0.5).abs() < 1e-12));
    }

    #[test]
    fn witness_is_deterministic() {
        let w = nonsubmodularity_witness().unwrap();
        assert!(w.violates());
        assert_eq!(w, nonsubmodularity_witness().unwrap());
        assert_abs_diff_eq!(w.gain_b, LN_2, epsilon = 1e-12);
    }

    #[test]
    fn larger_parity_needs_all_bits() {
        let x = XorInstance::new(4, vec![0, 1, 2]).unwrap();
        let v = [x.val()];
        assert_abs_diff_eq!(batch_objective(&x, &[0, 1], &v).unwrap(), LN_2, epsilon = 1e-12);
        assert_abs_diff_eq!(batch_objective(&x, &[0, 1, 2], &v).unwrap(), 0.0, epsilon = 1e-12);
    }
}
