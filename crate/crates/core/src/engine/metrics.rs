//! Learning-curve area and the win/tie/loss rule.

use serde::{Deserialize, Serialize};

use super::{EngineError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AucMethod {
    Simpson,
    /// Only two points.
    Trapezoid,
    /// A single point: zero-width curve, the value is that point.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Auc {
    pub value: f64,
    pub method: AucMethod,
}

/// Composite Simpson integral of `ys` over `xs`, divided by
/// `xs_last − xs_first`.
///
/// Uneven spacing uses the three-point non-uniform rule; with an odd number of
/// intervals the last one gets the Cartis correction, as in
/// `scipy.integrate.simpson`.
pub fn auc_simpson(xs: &[f64], ys: &[f64]) -> Result<Auc> {
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(EngineError::Metric(format!("{} xs but {} ys", xs.len(), ys.len())));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(EngineError::Metric("non-finite curve value".into()));
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(EngineError::Metric("xs must be strictly increasing".into()));
    }
    let n = xs.len();
    match n {
        1 => return Ok(Auc { value: ys[0], method: AucMethod::Degenerate }),
        2 => {
            return Ok(Auc { value: 0.5 * (ys[0] + ys[1]), method: AucMethod::Trapezoid });
        }
        _ => {}
    }
    // Even number of intervals up to `end`.
    let end = if n % 2 == 1 { n - 1 } else { n - 2 };
    let mut total = 0.0;
    for k in (0..end).step_by(2) {
        let h0 = xs[k + 1] - xs[k];
        let h1 = xs[k + 2] - xs[k + 1];
        let hsum = h0 + h1;
        let ratio = h0 / h1;
        total += hsum / 6.0
            * (ys[k] * (2.0 - 1.0 / ratio) + ys[k + 1] * hsum * hsum / (h0 * h1) + ys[k + 2] * (2.0 - ratio));
    }
    if n.is_multiple_of(2) {
        let h0 = xs[n - 2] - xs[n - 3];
        let h1 = xs[n - 1] - xs[n - 2];
        let alpha = (2.0 * h1 * h1 + 3.0 * h0 * h1) / (6.0 * (h0 + h1));
        let beta = (h1 * h1 + 3.0 * h0 * h1) / (6.0 * h0);
        let eta = h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
        total += alpha * ys[n - 1] + beta * ys[n - 2] - eta * ys[n - 3];
    }
    Ok(Auc { value: total / (xs[n - 1] - xs[0]), method: AucMethod::Simpson })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Win,
    Tie,
    Loss,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Win => "win",
            Outcome::Tie => "tie",
            Outcome::Loss => "loss",
        }
    }
}

/// Mean and sample standard deviation (`n − 1`); the deviation is 0 for a
/// single value.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// A wins when `mean_a − std_a > mean_b + std_b`, loses in the mirrored case,
/// and ties otherwise.
pub fn compare_aucs(a: &[f64], b: &[f64]) -> Result<Outcome> {
    if a.len() < 2 || b.len() < 2 {
        return Err(EngineError::Metric("need at least two runs per method".into()));
    }
    let (ma, sa) = mean_std(a);
    let (mb, sb) = mean_std(b);
    Ok(if ma - sa > mb + sb {
        Outcome::Win
    } else if mb - sb > ma + sa {
        Outcome::Loss
    } else {
        Outcome::Tie
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn simpson_examples() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let a = auc_simpson(&xs, &sq).unwrap();
        assert_eq!(a.method, AucMethod::Simpson);
        assert_abs_diff_eq!(a.value, 16.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(auc_simpson(&xs, &[0.7; 5]).unwrap().value, 0.7, epsilon = 1e-15);
        let lin: Vec<f64> = xs.iter().map(|x| 0.1 + 0.2 * x).collect();
        assert_abs_diff_eq!(auc_simpson(&xs, &lin).unwrap().value, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn simpson_matches_scipy_on_uneven_grids() {
        let xs = [100.0, 125.0, 150.0, 175.0, 200.0, 230.0];
        let ys = [0.4, 0.5, 0.58, 0.61, 0.66, 0.7];
        assert_abs_diff_eq!(auc_simpson(&xs, &ys).unwrap().value, 0.5842657342657344, epsilon = 1e-12);
        let xs = [0.0, 1.0, 3.0, 4.0];
        let ys = [1.0, 2.0, 0.5, 3.0];
        assert_abs_diff_eq!(auc_simpson(&xs, &ys).unwrap().value * 4.0, 6.444444444444445, epsilon = 1e-12);
    }

    #[test]
    fn simpson_fallbacks_and_errors() {
        assert_eq!(
            auc_simpson(&[0.0, 2.0], &[0.2, 0.4]).unwrap(),
            Auc { value: 0.30000000000000004, method: AucMethod::Trapezoid }
        );
        assert_eq!(auc_simpson(&[5.0], &[0.9]).unwrap().method, AucMethod::Degenerate);
        assert!(auc_simpson(&[0.0, 2.0, 1.0], &[0.0; 3]).is_err());
        assert!(auc_simpson(&[0.0, 1.0], &[0.0]).is_err());
    }

    #[test]
    fn compare_examples() {
        let around = |m: f64, s: f64| vec![m - s, m + s];
        // Two-point samples m ± s have sample std s·√2.
        let s = 0.1 / 2f64.sqrt();
        assert_eq!(compare_aucs(&around(10.0, s), &around(9.0, s)).unwrap(), Outcome::Win);
        assert_eq!(compare_aucs(&around(9.0, s), &around(10.0, s)).unwrap(), Outcome::Loss);
        assert_eq!(compare_aucs(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), Outcome::Tie);
        let s = 1.0 / 2f64.sqrt();
        assert_eq!(compare_aucs(&around(10.0, s), &around(9.5, s)).unwrap(), Outcome::Tie);
        assert!(compare_aucs(&[1.0], &[0.0, 0.1]).is_err());
    }

    #[test]
    fn sample_std_uses_n_minus_one() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert_abs_diff_eq!(s, (5.0f64 / 3.0).sqrt(), epsilon = 1e-15);
    }
}
