use std::fmt;

use ndarray::{Array2, ArrayView3};
use serde::{Deserialize, Serialize};

use super::{PosteriorError, Result, SUM_TOLERANCE};

/// First offending location found by [`PosteriorTensor::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    /// Dimensions are unusable (`T = 0`, `N = 0` or `C < 2`) or the buffer
    /// length does not match them.
    Shape {
        t: usize,
        n: usize,
        c: usize,
        len: usize,
    },
    NonFinite {
        t: usize,
        i: usize,
        c: usize,
    },
    EntryOutOfRange {
        t: usize,
        i: usize,
        c: usize,
        value: f64,
    },
    RowSum {
        t: usize,
        i: usize,
        sum: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape { t, n, c, len } => {
                write!(f, "bad shape T={t} N={n} C={c} with {len} values (need T,N >= 1, C >= 2, len = T*N*C)")
            }
            Violation::NonFinite { t, i, c } => write!(f, "non-finite entry at (t={t}, i={i}, c={c})"),
            Violation::EntryOutOfRange { t, i, c, value } => {
                write!(f, "entry {value} outside [0, 1] at (t={t}, i={i}, c={c})")
            }
            Violation::RowSum { t, i, sum } => write!(f, "row (t={t}, i={i}) sums to {sum}"),
        }
    }
}

/// `T × N × C` class probabilities, one distribution per (posterior draw, point).
///
/// Stored contiguously in `[t][i][c]` order, so the per-draw outer products of
/// the pairwise-joint estimator stream through memory.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorTensor {
    samples: usize,
    points: usize,
    classes: usize,
    probs: Vec<f64>,
}

impl PosteriorTensor {
    /// Build a tensor from a flat `[t][i][c]` buffer, validating every row.
    pub fn new(samples: usize, points: usize, classes: usize, probs: Vec<f64>) -> Result<Self> {
        let tensor = Self { samples, points, classes, probs };
        tensor.validate().map_err(PosteriorError::Invalid)?;
        Ok(tensor)
    }

    /// Build without validation. Callers must run [`validate`](Self::validate)
    /// before handing the tensor to any kernel.
    pub fn from_raw_unchecked(samples: usize, points: usize, classes: usize, probs: Vec<f64>) -> Self {
        Self { samples, points, classes, probs }
    }

    /// Build from nested `[t][i][c]` vectors.
    pub fn from_nested(rows: &[Vec<Vec<f64>>]) -> Result<Self> {
        let samples = rows.len();
        let points = rows.first().map_or(0, Vec::len);
        let classes = rows.first().and_then(|r| r.first()).map_or(0, Vec::len);
        let mut probs = Vec::with_capacity(samples * points * classes);
        for slice in rows {
            if slice.len() != points {
                return Err(PosteriorError::Shape { expected: points, got: slice.len() });
            }
            for row in slice {
                if row.len() != classes {
                    return Err(PosteriorError::Shape { expected: classes, got: row.len() });
                }
                probs.extend_from_slice(row);
            }
        }
        Self::new(samples, points, classes, probs)
    }

    /// Check the tensor invariants, reporting the first offending `(t, i)`.
    pub fn validate(&self) -> std::result::Result<(), Violation> {
        let (t_len, n, c) = (self.samples, self.points, self.classes);
        if t_len == 0 || n == 0 || c < 2 || self.probs.len() != t_len * n * c {
            return Err(Violation::Shape { t: t_len, n, c, len: self.probs.len() });
        }
        for t in 0..t_len {
            for i in 0..n {
                let row = self.row(t, i);
                let mut sum = 0.0;
                for (k, &p) in row.iter().enumerate() {
                    if !p.is_finite() {
                        return Err(Violation::NonFinite { t, i, c: k });
                    }
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Violation::EntryOutOfRange { t, i, c: k, value: p });
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > SUM_TOLERANCE {
                    return Err(Violation::RowSum { t, i, sum });
                }
            }
        }
        Ok(())
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn view(&self) -> ArrayView3<'_, f64> {
        ArrayView3::from_shape((self.samples, self.points, self.classes), &self.probs)
            .expect("buffer length matches shape")
    }

    /// `Pr(Y_i = · | θ_t)`.
    #[inline]
    pub fn row(&self, t: usize, i: usize) -> &[f64] {
        let start = (t * self.points + i) * self.classes;
        &self.probs[start..start + self.classes]
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.points {
            return Err(PosteriorError::OutOfRange { index: i, len: self.points });
        }
        Ok(())
    }

    /// Monte Carlo marginal `1/T Σ_t Pr(Y_i = · | θ_t)`.
    pub fn marginal(&self, i: usize) -> Result<LabelDistribution> {
        self.check_index(i)?;
        let mut out = vec![0.0; self.classes];
        self.marginal_into(i, &mut out);
        Ok(LabelDistribution { p: out })
    }

    /// Unchecked marginal written into `out` (length `C`).
    #[inline]
    pub(crate) fn marginal_into(&self, i: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for t in 0..self.samples {
            for (acc, &p) in out.iter_mut().zip(self.row(t, i)) {
                *acc += p;
            }
        }
        let inv = 1.0 / self.samples as f64;
        out.iter_mut().for_each(|v| *v *= inv);
    }

    /// Monte Carlo pairwise joint `1/T Σ_t outer(p_t(i), p_t(j))`; rows index
    /// the class of `Y_i`, columns the class of `Y_j`.
    pub fn pairwise_joint(&self, i: usize, j: usize) -> Result<JointDistribution> {
        self.check_index(i)?;
        self.check_index(j)?;
        let mut out = vec![0.0; self.classes * self.classes];
        self.joint_into(i, j, &mut out);
        Ok(JointDistribution { classes: self.classes, p: out })
    }

    /// Unchecked pairwise joint into a `C*C` row-major buffer. Summation runs
    /// over `t` ascending, then `c` ascending, then `c'` ascending.
    #[inline]
    pub(crate) fn joint_into(&self, i: usize, j: usize, out: &mut [f64]) {
        let c = self.classes;
        out.iter_mut().for_each(|v| *v = 0.0);
        for t in 0..self.samples {
            let pi = self.row(t, i);
            let pj = self.row(t, j);
            for (a, &pa) in pi.iter().enumerate() {
                let dst = &mut out[a * c..(a + 1) * c];
                for (acc, &pb) in dst.iter_mut().zip(pj) {
                    *acc += pa * pb;
                }
            }
        }
        let inv = 1.0 / self.samples as f64;
        out.iter_mut().for_each(|v| *v *= inv);
    }

    /// Row `i` is the marginal of point `i`.
    pub fn mean_predictive(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.points, self.classes));
        let mut buf = vec![0.0; self.classes];
        for i in 0..self.points {
            self.marginal_into(i, &mut buf);
            out.row_mut(i).iter_mut().zip(&buf).for_each(|(d, &s)| *d = s);
        }
        out
    }

    /// Restrict to the listed points, in the given order.
    pub fn select_points(&self, idx: &[usize]) -> Result<Self> {
        for &i in idx {
            self.check_index(i)?;
        }
        let mut probs = Vec::with_capacity(self.samples * idx.len() * self.classes);
        for t in 0..self.samples {
            for &i in idx {
                probs.extend_from_slice(self.row(t, i));
            }
        }
        Ok(Self { samples: self.samples, points: idx.len(), classes: self.classes, probs })
    }
}

fn check_distribution(p: &[f64]) -> Result<()> {
    let mut sum = 0.0;
    for &v in p {
        if !v.is_finite() || !(0.0..=1.0).contains(&v) {
            return Err(PosteriorError::Distribution(format!("entry {v} outside [0, 1]")));
        }
        sum += v;
    }
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(PosteriorError::Distribution(format!("sums to {sum}")));
    }
    Ok(())
}

/// A distribution over `C` classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelDistribution {
    p: Vec<f64>,
}

impl LabelDistribution {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(PosteriorError::Distribution("empty".into()));
        }
        check_distribution(&p)?;
        Ok(Self { p })
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    pub fn classes(&self) -> usize {
        self.p.len()
    }

    /// Most probable class; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        argmax(&self.p)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.p
    }
}

/// First index of the maximum entry.
pub fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in p.iter().enumerate().skip(1) {
        if v > p[best] {
            best = k;
        }
    }
    best
}

/// `C × C` joint over `(Y_i, Y_j)`, row-major with rows indexing `Y_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    classes: usize,
    p: Vec<f64>,
}

impl JointDistribution {
    pub fn new(classes: usize, p: Vec<f64>) -> Result<Self> {
        if classes == 0 || p.len() != classes * classes {
            return Err(PosteriorError::Shape { expected: classes * classes, got: p.len() });
        }
        check_distribution(&p)?;
        Ok(Self { classes, p })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let c = rows.len();
        let mut p = Vec::with_capacity(c * c);
        for r in rows {
            if r.len() != c {
                return Err(PosteriorError::Shape { expected: c, got: r.len() });
            }
            p.extend_from_slice(r);
        }
        Self::new(c, p)
    }

    /// Outer product of two marginals.
    pub fn product(a: &LabelDistribution, b: &LabelDistribution) -> Result<Self> {
        if a.classes() != b.classes() {
            return Err(PosteriorError::Shape { expected: a.classes(), got: b.classes() });
        }
        let p = a.probs().iter().flat_map(|&x| b.probs().iter().map(move |&y| x * y)).collect();
        Ok(Self { classes: a.classes(), p })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.p[a * self.classes + b]
    }

    /// Marginal of the row variable `Y_i`.
    pub fn row_marginal(&self) -> LabelDistribution {
        let p = self.p.chunks(self.classes).map(|r| r.iter().sum()).collect();
        LabelDistribution { p }
    }

    /// Marginal of the column variable `Y_j`.
    pub fn col_marginal(&self) -> LabelDistribution {
        let mut p = vec![0.0; self.classes];
        for row in self.p.chunks(self.classes) {
            p.iter_mut().zip(row).for_each(|(acc, &v)| *acc += v);
        }
        LabelDistribution { p }
    }

    pub fn transpose(&self) -> Self {
        let c = self.classes;
        let mut p = vec![0.0; c * c];
        for a in 0..c {
            for b in 0..c {
                p[b * c + a] = self.p[a * c + b];
            }
        }
        Self { classes: c, p }
    }

    /// `Pr(Y_j = · | Y_i = a)`, or `None` when row `a` carries no mass.
    pub fn conditional_given_row(&self, a: usize) -> Option<Vec<f64>> {
        let row = &self.p[a * self.classes..(a + 1) * self.classes];
        let mass: f64 = row.iter().sum();
        (mass > 0.0).then(|| row.iter().map(|v| v / mass).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posterior::mutual_information;

    fn two_class(rows: &[&[[f64; 2]]]) -> PosteriorTensor {
        let nested: Vec<Vec<Vec<f64>>> = rows.iter().map(|s| s.iter().map(|r| r.to_vec()).collect()).collect();
        PosteriorTensor::from_nested(&nested).unwrap()
    }

    #[test]
    fn marginal_examples() {
        let t = two_class(&[&[[0.3, 0.7]]]);
        assert_eq!(t.marginal(0).unwrap().probs(), &[0.3, 0.7]);

        let t = two_class(&[&[[1.0, 0.0]], &[[0.0, 1.0]]]);
        assert_eq!(t.marginal(0).unwrap().probs(), &[0.5, 0.5]);

        let t = two_class(&[&[[0.2, 0.8]], &[[0.5, 0.5]], &[[0.8, 0.2]]]);
        let m = t.marginal(0).unwrap();
        assert!((m.probs()[0] - 0.5).abs() < 1e-15 && (m.probs()[1] - 0.5).abs() < 1e-15);

        assert!(matches!(t.marginal(1), Err(PosteriorError::OutOfRange { index: 1, len: 1 })));
    }

    #[test]
    fn mean_predictive_matches_marginals() {
        let t = two_class(&[&[[0.2, 0.8], [1.0, 0.0]], &[[0.5, 0.5], [0.0, 1.0]], &[[0.8, 0.2], [1.0, 0.0]]]);
        let m = t.mean_predictive();
        for i in 0..2 {
            assert_eq!(m.row(i).to_vec(), t.marginal(i).unwrap().into_vec());
        }
    }

    #[test]
    fn pairwise_joint_examples() {
        let t = two_class(&[&[[1.0, 0.0], [0.0, 1.0]]]);
        assert_eq!(t.pairwise_joint(0, 1).unwrap().probs(), &[0.0, 1.0, 0.0, 0.0]);

        let t = two_class(&[&[[1.0, 0.0], [1.0, 0.0]], &[[0.0, 1.0], [0.0, 1.0]]]);
        assert_eq!(t.pairwise_joint(0, 1).unwrap().probs(), &[0.5, 0.0, 0.0, 0.5]);

        let t = two_class(&[&[[0.3, 0.7], [0.9, 0.1]]]);
        assert!(mutual_information(&t.pairwise_joint(0, 1).unwrap()) <= 1e-15);
        assert!(t.pairwise_joint(0, 2).is_err());
    }

    #[test]
    fn validate_reports_first_offender() {
        let ok = PosteriorTensor::from_raw_unchecked(1, 1, 2, vec![0.5, 0.5]);
        assert_eq!(ok.validate(), Ok(()));

        let short = PosteriorTensor::from_raw_unchecked(2, 2, 2, vec![0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.6, 0.3]);
        assert!(matches!(short.validate(), Err(Violation::RowSum { t: 1, i: 1, .. })));

        let negative = PosteriorTensor::from_raw_unchecked(1, 2, 2, vec![0.5, 0.5, -0.1, 1.1]);
        assert!(matches!(negative.validate(), Err(Violation::EntryOutOfRange { t: 0, i: 1, c: 0, .. })));

        let nan = PosteriorTensor::from_raw_unchecked(1, 1, 2, vec![f64::NAN, 1.0]);
        assert!(matches!(nan.validate(), Err(Violation::NonFinite { .. })));

        let one_class = PosteriorTensor::from_raw_unchecked(1, 1, 1, vec![1.0]);
        assert!(matches!(one_class.validate(), Err(Violation::Shape { .. })));
    }

    #[test]
    fn joint_helpers() {
        let j = JointDistribution::from_rows(&[vec![0.1, 0.2], vec![0.3, 0.4]]).unwrap();
        assert!((j.row_marginal().probs()[0] - 0.3).abs() < 1e-15);
        assert!((j.col_marginal().probs()[0] - 0.4).abs() < 1e-15);
        assert_eq!(j.transpose().get(0, 1), 0.3);
        let cond = j.conditional_given_row(1).unwrap();
        assert!((cond[0] - 0.3 / 0.7).abs() < 1e-15);
        assert!(JointDistribution::from_rows(&[vec![0.5, 0.2], vec![0.3, 0.4]]).is_err());
    }
}
