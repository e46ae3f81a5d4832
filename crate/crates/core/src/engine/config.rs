//! Experiment configuration (TOML).
//!
//! ```toml
//! name = "blobs"
//! seed = 0
//! strategy = "mell"
//!
//! [experiment]
//! n_seed = 100
//! n_val = 300
//! n_pool = 1000
//! n_query = 25
//! n_test = 1000
//! K = 8
//! L = 300
//! J = 1000
//! T = 50
//! shift = "induced"
//!
//! [data]
//! dim = 2
//! classes = 3
//!
//! [model]
//! hidden = [64]
//!
//! [output]
//! record_timing = true
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EngineError, Result};
use crate::models::MlpConfig;
use crate::strategies::Strategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Shift {
    #[default]
    None,
    /// Seed set = the `n_seed` points with the lowest mean feature value.
    Induced,
}

/// Set sizes and loop parameters, named as in the usual benchmark tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budget {
    pub n_seed: usize,
    pub n_val: usize,
    pub n_pool: usize,
    pub n_query: usize,
    pub n_test: usize,
    /// Acquisition iterations.
    #[serde(rename = "K")]
    pub k: usize,
    /// Validation subsample size per iteration (MELL/MEZL).
    #[serde(rename = "L")]
    pub l: usize,
    /// Pool subsample size per iteration (MELL/MEZL).
    #[serde(rename = "J")]
    pub j: usize,
    /// Posterior samples.
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(default)]
    pub shift: Shift,
}

/// One mixture component given explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSpec {
    pub class: usize,
    pub center: Vec<f64>,
    /// Relative mixture weight.
    pub weight: f64,
    /// Per-cluster standard deviation; defaults to `DataSpec::spread`.
    pub spread: Option<f64>,
}

/// Gaussian-mixture generator. Each class owns `clusters_per_class` centers
/// drawn from `N(0, separation² I)`; points are `center + spread · N(0, I)`.
/// A non-empty `clusters` list replaces the random centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSpec {
    pub dim: usize,
    pub classes: usize,
    pub clusters_per_class: usize,
    pub separation: f64,
    pub spread: f64,
    /// Relative class frequencies; uniform if empty.
    pub class_weights: Vec<f64>,
    /// Fixes the dataset across experiment seeds; `None` derives it from the
    /// experiment seed.
    pub seed: Option<u64>,
    pub clusters: Vec<ClusterSpec>,
}

impl Default for DataSpec {
    fn default() -> Self {
        Self {
            dim: 2,
            classes: 3,
            clusters_per_class: 2,
            separation: 3.0,
            spread: 1.0,
            class_weights: Vec::new(),
            seed: None,
            clusters: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Write wall-clock phase timings; when off they are written as 0 so
    /// repeated runs are byte-identical.
    pub record_timing: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { record_timing: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub strategy: Strategy,
    pub experiment: Budget,
    #[serde(default)]
    pub data: DataSpec,
    #[serde(default)]
    pub model: MlpConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_name() -> String {
    "experiment".to_string()
}

const BUDGET_KEYS: [&str; 10] = ["n_seed", "n_val", "n_pool", "n_query", "n_test", "K", "L", "J", "T", "shift"];

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_toml_with_overrides::<&str>(text, &[])
    }

    pub fn from_toml_with_overrides<S: AsRef<str>>(text: &str, overrides: &[S]) -> Result<Self> {
        let mut value: toml::Table = toml::from_str(text).map_err(|e| EngineError::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut value, o.as_ref())?;
        }
        let cfg: Self =
            toml::Value::Table(value).try_into().map_err(|e: toml::de::Error| EngineError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| EngineError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_with_overrides(&text, overrides)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let b = &self.experiment;
        let bad = |m: String| Err(EngineError::Config(m));
        for (name, v) in [
            ("n_seed", b.n_seed),
            ("n_val", b.n_val),
            ("n_pool", b.n_pool),
            ("n_query", b.n_query),
            ("n_test", b.n_test),
            ("L", b.l),
            ("J", b.j),
            ("T", b.t),
        ] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        if b.n_query * b.k > b.n_pool {
            return bad(format!("n_query·K = {} exceeds n_pool = {}", b.n_query * b.k, b.n_pool));
        }
        if b.l > b.n_val {
            return bad(format!("L = {} exceeds n_val = {}", b.l, b.n_val));
        }
        if b.j > b.n_pool {
            return bad(format!("J = {} exceeds n_pool = {}", b.j, b.n_pool));
        }
        let d = &self.data;
        if d.classes < 2 {
            return bad("data.classes must be at least 2".into());
        }
        if d.dim == 0 || d.clusters_per_class == 0 {
            return bad("data.dim and data.clusters_per_class must be positive".into());
        }
        if !(d.spread >= 0.0 && d.separation >= 0.0) {
            return bad("data.spread and data.separation must be non-negative".into());
        }
        if !d.class_weights.is_empty()
            && (d.class_weights.len() != d.classes || d.class_weights.iter().any(|w| !(*w > 0.0)))
        {
            return bad("data.class_weights needs one positive weight per class".into());
        }
        for c in &d.clusters {
            if c.class >= d.classes
                || c.center.len() != d.dim
                || !(c.weight > 0.0)
                || c.spread.is_some_and(|s| !(s >= 0.0))
            {
                return bad(format!("invalid cluster {c:?}"));
            }
        }
        if !d.clusters.is_empty() && (0..d.classes).any(|k| d.clusters.iter().all(|c| c.class != k)) {
            return bad("every class needs at least one cluster".into());
        }
        self.model.validate().map_err(|e| EngineError::Config(e.to_string()))?;
        if self.strategy.needs_embeddings() && self.model.hidden.is_empty() {
            return bad(format!("strategy {} needs embeddings but the model has no hidden layer", self.strategy));
        }
        Ok(())
    }

    pub fn total_points(&self) -> usize {
        let b = &self.experiment;
        b.n_seed + b.n_val + b.n_pool + b.n_test
    }
}

/// Set `key=value` in a parsed TOML table. Dotted keys address sections;
/// bare budget names (`K`, `n_pool`, ...) go to `[experiment]`. Values are
/// parsed as TOML and fall back to plain strings.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) =
        spec.split_once('=').ok_or_else(|| EngineError::Config(format!("override {spec:?} is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let mut path: Vec<&str> = key.split('.').collect();
    if path.len() == 1 && BUDGET_KEYS.contains(&key) {
        path.insert(0, "experiment");
    }
    if path.iter().any(|p| p.is_empty()) {
        return Err(EngineError::Config(format!("bad override key {key:?}")));
    }
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));

    let (last, parents) = path.split_last().expect("non-empty path");
    let mut cursor = table;
    for part in parents {
        let entry = cursor.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cursor = entry
            .as_table_mut()
            .ok_or_else(|| EngineError::Config(format!("override {key:?}: {part} is not a section")))?;
    }
    cursor.insert(last.to_string(), value);
    Ok(())
}
