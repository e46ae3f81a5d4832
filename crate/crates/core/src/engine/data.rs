//! Synthetic data, splits and subsampling.

use ndarray::Array2;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::config::{ClusterSpec, DataSpec, ExperimentConfig, Shift};
use super::{EngineError, Result};
use crate::seeding::{derive_seed, rng_from, stream};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    pub classes: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn rows(&self, idx: &[usize]) -> Array2<f64> {
        self.features.select(ndarray::Axis(0), idx)
    }

    pub fn labels_of(&self, idx: &[usize]) -> Vec<usize> {
        idx.iter().map(|&i| self.labels[i]).collect()
    }
}

/// `n` points from the Gaussian mixture described by `spec`.
pub fn make_synthetic_dataset(spec: &DataSpec, n: usize, seed: u64) -> Result<Dataset> {
    if spec.classes < 2 {
        return Err(EngineError::Config("need at least 2 classes".into()));
    }
    if spec.dim == 0 || spec.clusters_per_class == 0 {
        return Err(EngineError::Config("dim and clusters_per_class must be positive".into()));
    }
    let mut rng = rng_from(seed);
    let normal = |rng: &mut rand_chacha::ChaCha8Rng| -> f64 { StandardNormal.sample(rng) };
    let clusters: Vec<ClusterSpec> = if spec.clusters.is_empty() {
        let class_weights =
            if spec.class_weights.is_empty() { vec![1.0; spec.classes] } else { spec.class_weights.clone() };
        (0..spec.classes * spec.clusters_per_class)
            .map(|k| ClusterSpec {
                class: k / spec.clusters_per_class,
                center: (0..spec.dim).map(|_| spec.separation * normal(&mut rng)).collect(),
                weight: class_weights[k / spec.clusters_per_class],
                spread: None,
            })
            .collect()
    } else {
        spec.clusters.clone()
    };
    if let Some(c) = clusters.iter().find(|c| c.class >= spec.classes || c.center.len() != spec.dim) {
        return Err(EngineError::Config(format!("invalid cluster {c:?}")));
    }

    let total: f64 = clusters.iter().map(|c| c.weight).sum();
    let mut features = Array2::zeros((n, spec.dim));
    let mut labels = Vec::with_capacity(n);
    for r in 0..n {
        let mut u = rng.random::<f64>() * total;
        let mut pick = clusters.len() - 1;
        for (k, c) in clusters.iter().enumerate() {
            if u < c.weight {
                pick = k;
                break;
            }
            u -= c.weight;
        }
        let cluster = &clusters[pick];
        let spread = cluster.spread.unwrap_or(spec.spread);
        for (k, c) in cluster.center.iter().enumerate() {
            features[[r, k]] = c + spread * normal(&mut rng);
        }
        labels.push(cluster.class);
    }
    Ok(Dataset { features, labels, classes: spec.classes })
}

/// Source = the `n_source` rows with the lowest mean feature (ties to the
/// lower index); target = the rest. Both ascending.
pub fn induce_shift(features: &Array2<f64>, n_source: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = features.nrows();
    if n_source > n {
        return Err(EngineError::Config(format!("cannot take {n_source} source points from {n}")));
    }
    let means: Vec<f64> = features.rows().into_iter().map(|r| r.mean().unwrap_or(0.0)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| means[a].total_cmp(&means[b]).then(a.cmp(&b)));
    let mut source = order[..n_source].to_vec();
    let mut target = order[n_source..].to_vec();
    source.sort_unstable();
    target.sort_unstable();
    Ok((source, target))
}

/// The four disjoint base sets, each ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub seed: Vec<usize>,
    pub pool: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

pub fn make_split(data: &Dataset, cfg: &ExperimentConfig) -> Result<Split> {
    let b = &cfg.experiment;
    if data.len() < cfg.total_points() {
        return Err(EngineError::Config(format!(
            "dataset has {} points, config needs {}",
            data.len(),
            cfg.total_points()
        )));
    }
    let mut rng = rng_from(derive_seed(cfg.seed, &[stream::SPLIT]));
    let (seed, mut rest) = match b.shift {
        Shift::None => {
            let mut all: Vec<usize> = (0..data.len()).collect();
            all.shuffle(&mut rng);
            let rest = all.split_off(b.n_seed);
            (all, rest)
        }
        Shift::Induced => {
            let (source, mut target) = induce_shift(&data.features, b.n_seed)?;
            target.shuffle(&mut rng);
            (source, target)
        }
    };
    let mut take = |n: usize| {
        let mut head: Vec<usize> = rest.drain(..n).collect();
        head.sort_unstable();
        head
    };
    let val = take(b.n_val);
    let pool = take(b.n_pool);
    let test = take(b.n_test);
    let mut seed = seed;
    seed.sort_unstable();
    Ok(Split { seed, pool, val, test })
}

/// `m` elements of `idx` uniformly without replacement, in their original
/// order. Returns all of `idx` and `true` when `m` exceeds its length.
pub fn subsample(idx: &[usize], m: usize, seed: u64) -> (Vec<usize>, bool) {
    if m >= idx.len() {
        return (idx.to_vec(), m > idx.len());
    }
    let mut pos = index::sample(&mut rng_from(seed), idx.len(), m).into_vec();
    pos.sort_unstable();
    (pos.into_iter().map(|p| idx[p]).collect(), false)
}
