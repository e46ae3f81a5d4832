//! Exact checks of the information identities behind the acquisition scores.
//!
//! Every analysis enumerates a finite-support posterior (or uses the
//! linear-Gaussian closed forms), so tolerances are at float precision. Each
//! one produces a [`Report`] of named checks for the CLI's `analyze` command.

mod decomposition;
mod finite;
mod mezl;
mod prop1;
mod xor;

pub use decomposition::{decomposition_sweep, exact_decomposition, DecompositionReport, DecompositionSweep};
pub use finite::{
    bald_scores, batch_objective, condition, entropy_scores, joint_entropy_of, joint_of, marginal, mell_scores,
    mezl_scores, mi_label_theta, mi_label_theta_given, mi_labels, FiniteLabelModel, Reweighted, MAX_ASSIGNMENTS,
};
pub use mezl::{confidence_model, mezl_failure, mezl_loss_reduction, MezlFailureReport};
pub use prop1::{default_prop1, prop1_sweep, standard_normal_points, Prop1Report, Prop1Row};
pub use xor::{nonsubmodularity_witness, xor_report, xor_scores, Witness, XorInstance, XorReport, XorScores, MAX_BITS};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::ModelError;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("point index {index} out of range for {len} points")]
    OutOfRange { index: usize, len: usize },

    #[error("too large to enumerate: {0}")]
    TooLarge(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Model(#[from] ModelError),
}

pub type Result<T> = std::result::Result<T, AnalysisError>;

/// One named pass/fail comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `<=`, `>=`, `==` or `≈`.
    pub relation: String,
    pub target: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Self::make(name, value, "<=", bound, 0.0, value <= bound)
    }

    pub fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Self::make(name, value, ">=", bound, 0.0, value >= bound)
    }

    pub fn equals(name: &str, value: f64, target: f64) -> Self {
        Self::make(name, value, "==", target, 0.0, value == target)
    }

    pub fn within(name: &str, value: f64, target: f64, tolerance: f64) -> Self {
        Self::make(name, value, "≈", target, tolerance, (value - target).abs() <= tolerance)
    }

    fn make(name: &str, value: f64, relation: &str, target: f64, tolerance: f64, passed: bool) -> Self {
        Self { name: name.to_string(), value, relation: relation.to_string(), target, tolerance, passed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    Decomposition,
    Xor,
    MezlFailure,
    Prop1,
}

impl Analysis {
    pub const ALL: [Analysis; 4] = [Analysis::Decomposition, Analysis::Xor, Analysis::MezlFailure, Analysis::Prop1];

    pub fn name(self) -> &'static str {
        match self {
            Analysis::Decomposition => "decomposition",
            Analysis::Xor => "xor",
            Analysis::MezlFailure => "mezl-failure",
            Analysis::Prop1 => "prop1",
        }
    }
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Analysis {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self> {
        Analysis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| AnalysisError::Invalid(format!("unknown analysis {s:?}")))
    }
}

/// Uniform wrapper written as `<name>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub analysis: Analysis,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub details: serde_json::Value,
}

/// Run one analysis with its default instance.
pub fn run_analysis(which: Analysis) -> Result<Report> {
    let (checks, details) = match which {
        Analysis::Decomposition => {
            let r = decomposition_sweep(200, 0)?;
            (r.checks.clone(), serde_json::to_value(r))
        }
        Analysis::Xor => {
            let r = xor_report(10)?;
            (r.checks.clone(), serde_json::to_value(r))
        }
        Analysis::MezlFailure => {
            let r = mezl_failure()?;
            (r.checks.clone(), serde_json::to_value(r))
        }
        Analysis::Prop1 => {
            let r = default_prop1(0)?;
            (r.checks.clone(), serde_json::to_value(r))
        }
    };
    let details = details.map_err(|e| AnalysisError::Invalid(e.to_string()))?;
    Ok(Report { analysis: which, passed: checks.iter().all(|c| c.passed), checks, details })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for a in Analysis::ALL {
            assert_eq!(a.name().parse::<Analysis>().unwrap(), a);
            assert_eq!(serde_json::to_value(a).unwrap(), a.name());
        }
        assert!("everything".parse::<Analysis>().is_err());
    }

    #[test]
    fn every_default_analysis_passes() {
        for a in Analysis::ALL {
            let r = run_analysis(a).unwrap();
            assert!(r.passed, "{a}: {:#?}", r.checks);
        }
    }

    #[test]
    fn check_relations() {
        assert!(Check::within("x", 1.0, 1.0 + 1e-13, 1e-12).passed);
        assert!(!Check::equals("x", 1e-300, 0.0).passed);
        assert!(!Check::at_most("x", f64::NAN, 1.0).passed);
    }
}
