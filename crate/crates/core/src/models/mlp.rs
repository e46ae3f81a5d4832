//! Multilayer perceptron with Monte Carlo dropout.
//!
//! ReLU hidden layers, each followed by inverted dropout, and a softmax
//! output trained with cross-entropy by SGD with momentum and L2 weight
//! decay. A posterior draw `θ_t` is one dropout mask per hidden layer, shared
//! by every input row of that draw so that the labels of different points are
//! coupled through the same `θ_t`.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{BayesianClassifier, ModelError, Result};
use crate::posterior::PosteriorTensor;
use crate::seeding::{derive_seed, rng_from};

pub const CHECKPOINT_VERSION: u32 = 1;

/// Architecture and optimizer settings.
///
/// Defaults follow the usual VGG-style recipe scaled to small networks:
/// SGD with momentum 0.9, weight decay 5e-4, and the learning rate divided by
/// ten every `lr_decay_step` iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    pub dropout: f64,
    pub iterations: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// `0` disables the step schedule.
    pub lr_decay_step: usize,
    pub lr_decay_factor: f64,
    pub momentum: f64,
    pub weight_decay: f64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden: vec![64],
            dropout: 0.25,
            iterations: 1000,
            batch_size: 64,
            learning_rate: 0.01,
            lr_decay_step: 750,
            lr_decay_factor: 0.1,
            momentum: 0.9,
            weight_decay: 5e-4,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(ModelError::InvalidParameter(m.to_string()));
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        if self.hidden.contains(&0) {
            return bad("hidden widths must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must lie in [0, 1)");
        }
        if self.weight_decay < 0.0 || !(self.lr_decay_factor > 0.0) {
            return bad("weight_decay must be >= 0 and lr_decay_factor > 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Dense {
    /// `out × in`
    weights: Array2<f64>,
    bias: Array1<f64>,
}

impl Dense {
    fn forward(&self, input: &Array2<f64>) -> Array2<f64> {
        input.dot(&self.weights.t()) + &self.bias
    }
}

/// Per-layer weight and bias gradients.
type Gradients = Vec<(Array2<f64>, Array1<f64>)>;

/// Activations kept for backpropagation.
struct Trace {
    /// Input to each layer; `inputs[0]` is the batch itself.
    inputs: Vec<Array2<f64>>,
    /// Pre-activations of hidden layers.
    pre: Vec<Array2<f64>>,
    probs: Array2<f64>,
}

/// Dropout MLP classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMlp {
    input_dim: usize,
    classes: usize,
    config: MlpConfig,
    seed: u64,
    /// Number of completed `fit` calls; keeps repeated fits on fresh streams.
    fits: u64,
    layers: Vec<Dense>,
}

impl DropoutMlp {
    /// He-initialized network; biases start at zero.
    pub fn new(input_dim: usize, classes: usize, config: MlpConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        if input_dim == 0 || classes < 2 {
            return Err(ModelError::InvalidParameter("need input_dim >= 1 and classes >= 2".into()));
        }
        let mut rng = rng_from(derive_seed(seed, &[0x1417]));
        let mut widths = vec![input_dim];
        widths.extend(&config.hidden);
        widths.push(classes);
        let layers = widths
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let scale = (2.0 / fan_in as f64).sqrt();
                let weights = Array2::from_shape_fn((fan_out, fan_in), |_| {
                    scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
                });
                Dense { weights, bias: Array1::zeros(fan_out) }
            })
            .collect();
        Ok(Self { input_dim, classes, config, seed, fits: 0, layers })
    }

    pub fn config(&self) -> &MlpConfig {
        &self.config
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn hidden_layers(&self) -> usize {
        self.layers.len() - 1
    }

    fn check_input(&self, x: &ArrayView2<'_, f64>) -> Result<()> {
        if x.ncols() != self.input_dim {
            return Err(ModelError::Shape(format!("expected {} features, got {}", self.input_dim, x.ncols())));
        }
        Ok(())
    }

    /// Inverted-dropout masks with `rows` rows per hidden layer; entries are
    /// `0` or `1 / (1 − p)`.
    fn draw_masks<R: Rng>(&self, rows: usize, rng: &mut R) -> Vec<Array2<f64>> {
        let p = self.config.dropout;
        let keep = 1.0 / (1.0 - p);
        self.layers[..self.hidden_layers()]
            .iter()
            .map(|layer| {
                let width = layer.weights.nrows();
                if p == 0.0 {
                    Array2::ones((rows, width))
                } else {
                    Array2::from_shape_fn((rows, width), |_| if rng.random::<f64>() < p { 0.0 } else { keep })
                }
            })
            .collect()
    }

    /// Masks for one posterior draw, shared by every input row.
    pub fn sample_masks(&self, seed: u64) -> Vec<Array2<f64>> {
        self.draw_masks(1, &mut rng_from(seed))
    }

    fn forward_trace(&self, x: ArrayView2<'_, f64>, masks: Option<&[Array2<f64>]>) -> Trace {
        let mut inputs = vec![x.to_owned()];
        let mut pre = Vec::with_capacity(self.hidden_layers());
        for (l, layer) in self.layers[..self.hidden_layers()].iter().enumerate() {
            let z = layer.forward(inputs.last().expect("non-empty"));
            let mut h = z.mapv(|v| v.max(0.0));
            if let Some(m) = masks {
                h *= &m[l];
            }
            pre.push(z);
            inputs.push(h);
        }
        let logits = self.layers.last().expect("output layer").forward(inputs.last().expect("non-empty"));
        Trace { inputs, pre, probs: softmax_rows(logits) }
    }

    fn probabilities(&self, x: ArrayView2<'_, f64>, masks: Option<&[Array2<f64>]>) -> Array2<f64> {
        self.forward_trace(x, masks).probs
    }

    /// Mean cross-entropy plus `wd/2 ‖params‖²` and its gradient, flattened in
    /// [`parameters`](Self::parameters) order. `masks` rows broadcast over the batch.
    pub fn loss_and_gradient(
        &self,
        x: ArrayView2<'_, f64>,
        labels: &[usize],
        masks: Option<&[Array2<f64>]>,
    ) -> Result<(f64, Vec<f64>)> {
        self.check_input(&x)?;
        self.check_labels(x.nrows(), labels)?;
        let trace = self.forward_trace(x, masks);
        let (loss, grads) = self.backward(&trace, labels, masks);
        let flat = grads.iter().flat_map(|(w, b)| w.iter().chain(b.iter()).copied()).collect();
        Ok((loss, flat))
    }

    fn check_labels(&self, rows: usize, labels: &[usize]) -> Result<()> {
        if rows != labels.len() {
            return Err(ModelError::Shape(format!("{rows} rows but {} labels", labels.len())));
        }
        if rows == 0 {
            return Err(ModelError::Empty);
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= self.classes) {
            return Err(ModelError::InvalidLabel { label, classes: self.classes });
        }
        Ok(())
    }

    fn backward(&self, trace: &Trace, labels: &[usize], masks: Option<&[Array2<f64>]>) -> (f64, Gradients) {
        let n = labels.len() as f64;
        let wd = self.config.weight_decay;
        let mut ce = 0.0;
        let mut delta = trace.probs.clone();
        for (r, &y) in labels.iter().enumerate() {
            ce -= trace.probs[[r, y]].max(f64::MIN_POSITIVE).ln();
            delta[[r, y]] -= 1.0;
        }
        delta /= n;
        let mut penalty = 0.0;
        let mut grads = vec![(Array2::zeros((0, 0)), Array1::zeros(0)); self.layers.len()];
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let input = &trace.inputs[l];
            let mut gw = delta.t().dot(input);
            let mut gb = delta.sum_axis(Axis(0));
            gw.scaled_add(wd, &layer.weights);
            gb.scaled_add(wd, &layer.bias);
            penalty += layer.weights.iter().map(|w| w * w).sum::<f64>() + layer.bias.iter().map(|b| b * b).sum::<f64>();
            if l > 0 {
                let mut back = delta.dot(&layer.weights);
                if let Some(m) = masks {
                    back *= &m[l - 1];
                }
                back.zip_mut_with(&trace.pre[l - 1], |d, &z| {
                    if z <= 0.0 {
                        *d = 0.0;
                    }
                });
                delta = back;
            }
            grads[l] = (gw, gb);
        }
        (ce / n + 0.5 * wd * penalty, grads)
    }

    /// All weights and biases, layer by layer, weights row-major then bias.
    pub fn parameters(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied()).collect()
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        let total: usize = self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum();
        if params.len() != total {
            return Err(ModelError::Shape(format!("expected {total} parameters, got {}", params.len())));
        }
        let mut it = params.iter().copied();
        for layer in &mut self.layers {
            layer.weights.iter_mut().chain(layer.bias.iter_mut()).for_each(|p| *p = it.next().expect("length checked"));
        }
        Ok(())
    }

    /// Train from the current weights for `config.iterations` minibatch steps.
    pub fn train(&mut self, x: ArrayView2<'_, f64>, labels: &[usize]) -> Result<()> {
        self.check_input(&x)?;
        self.check_labels(x.nrows(), labels)?;
        let cfg = self.config.clone();
        let n = x.nrows();
        let batch = cfg.batch_size.min(n);
        let mut rng = rng_from(derive_seed(self.seed, &[0x7124, self.fits]));
        let mut velocity: Vec<(Array2<f64>, Array1<f64>)> =
            self.layers.iter().map(|l| (Array2::zeros(l.weights.raw_dim()), Array1::zeros(l.bias.len()))).collect();
        let mut order: Vec<usize> = (0..n).collect();
        let mut cursor = n;
        let mut batch_x = Array2::zeros((batch, self.input_dim));
        let mut batch_y = vec![0usize; batch];

        for iteration in 0..cfg.iterations {
            for (slot, y) in batch_y.iter_mut().enumerate() {
                if cursor == n {
                    order.shuffle(&mut rng);
                    cursor = 0;
                }
                let r = order[cursor];
                cursor += 1;
                batch_x.row_mut(slot).assign(&x.row(r));
                *y = labels[r];
            }
            let masks = self.draw_masks(batch, &mut rng);
            let trace = self.forward_trace(batch_x.view(), Some(&masks));
            let (loss, grads) = self.backward(&trace, &batch_y, Some(&masks));
            if !loss.is_finite() {
                return Err(ModelError::NonFinite { iteration });
            }
            let lr = match cfg.lr_decay_step {
                0 => cfg.learning_rate,
                step => cfg.learning_rate * cfg.lr_decay_factor.powi((iteration / step) as i32),
            };
            for ((layer, vel), (gw, gb)) in self.layers.iter_mut().zip(&mut velocity).zip(grads) {
                vel.0 *= cfg.momentum;
                vel.0 += &gw;
                vel.1 *= cfg.momentum;
                vel.1 += &gb;
                layer.weights.scaled_add(-lr, &vel.0);
                layer.bias.scaled_add(-lr, &vel.1);
            }
        }
        self.fits += 1;
        Ok(())
    }

    /// Mean cross-entropy of the point predictive (no dropout, no penalty).
    pub fn cross_entropy(&self, x: ArrayView2<'_, f64>, labels: &[usize]) -> Result<f64> {
        self.check_input(&x)?;
        self.check_labels(x.nrows(), labels)?;
        let probs = self.probabilities(x, None);
        let total: f64 = labels.iter().enumerate().map(|(r, &y)| -probs[[r, y]].max(f64::MIN_POSITIVE).ln()).sum();
        Ok(total / labels.len() as f64)
    }

    /// Argmax of the point predictive; ties to the lowest class.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<usize> {
        self.point_predictive(x).rows().into_iter().map(|r| crate::posterior::argmax(&r.to_vec())).collect()
    }

    pub fn checkpoint(&self) -> MlpCheckpoint {
        MlpCheckpoint {
            version: CHECKPOINT_VERSION,
            input_dim: self.input_dim,
            classes: self.classes,
            config: self.config.clone(),
            seed: self.seed,
            fits: self.fits,
            layers: self
                .layers
                .iter()
                .map(|l| LayerState { weights: l.weights.clone(), bias: l.bias.to_vec() })
                .collect(),
        }
    }

    pub fn from_checkpoint(ck: MlpCheckpoint) -> Result<Self> {
        if ck.version != CHECKPOINT_VERSION {
            return Err(ModelError::Checkpoint(format!("unsupported version {}", ck.version)));
        }
        let mut model = Self::new(ck.input_dim, ck.classes, ck.config, ck.seed)?;
        if ck.layers.len() != model.layers.len() {
            return Err(ModelError::Checkpoint("layer count does not match config".into()));
        }
        for (dst, src) in model.layers.iter_mut().zip(ck.layers) {
            if dst.weights.raw_dim() != src.weights.raw_dim() || dst.bias.len() != src.bias.len() {
                return Err(ModelError::Checkpoint("layer shape does not match config".into()));
            }
            dst.weights = src.weights;
            dst.bias = Array1::from(src.bias);
        }
        model.fits = ck.fits;
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.checkpoint()).expect("checkpoint serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let ck: MlpCheckpoint = serde_json::from_str(s).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
        Self::from_checkpoint(ck)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerState {
    pub weights: Array2<f64>,
    pub bias: Vec<f64>,
}

/// Versioned weights plus the RNG stream state (`seed`, `fits`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpCheckpoint {
    pub version: u32,
    pub input_dim: usize,
    pub classes: usize,
    pub config: MlpConfig,
    pub seed: u64,
    pub fits: u64,
    pub layers: Vec<LayerState>,
}

fn softmax_rows(mut logits: Array2<f64>) -> Array2<f64> {
    for mut row in logits.rows_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
    logits
}

impl BayesianClassifier for DropoutMlp {
    fn classes(&self) -> usize {
        self.classes
    }

    fn fit(&mut self, features: ArrayView2<'_, f64>, labels: &[usize]) -> Result<()> {
        self.train(features, labels)
    }

    fn posterior_predictive(
        &self,
        features: ArrayView2<'_, f64>,
        samples: usize,
        seed: u64,
    ) -> Result<PosteriorTensor> {
        self.check_input(&features)?;
        if samples == 0 {
            return Err(ModelError::InvalidParameter("need at least one posterior sample".into()));
        }
        let n = features.nrows();
        let mut rng = rng_from(seed);
        let mut buf = Vec::with_capacity(samples * n * self.classes);
        for _ in 0..samples {
            let masks = self.draw_masks(1, &mut rng);
            let probs = self.probabilities(features, Some(&masks));
            buf.extend(probs.iter());
        }
        Ok(PosteriorTensor::new(samples, n, self.classes, buf)?)
    }

    fn point_predictive(&self, features: ArrayView2<'_, f64>) -> Array2<f64> {
        self.probabilities(features, None)
    }

    fn embeddings(&self, features: ArrayView2<'_, f64>) -> Option<Array2<f64>> {
        if self.hidden_layers() == 0 {
            return None;
        }
        let mut trace = self.forward_trace(features, None);
        trace.inputs.pop()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn small_config() -> MlpConfig {
        MlpConfig { hidden: vec![8], iterations: 300, batch_size: 8, learning_rate: 0.05, ..MlpConfig::default() }
    }

    #[test]
    fn zero_iterations_leave_weights_unchanged() {
        let cfg = MlpConfig { iterations: 0, ..small_config() };
        let mut m = DropoutMlp::new(2, 2, cfg, 1).unwrap();
        let before = m.parameters();
        m.fit(array![[0.0, 1.0]].view(), &[1]).unwrap();
        assert_eq!(before, m.parameters());
    }

    #[test]
    fn memorizes_a_single_sample() {
        let mut m = DropoutMlp::new(2, 3, small_config(), 4).unwrap();
        let x = array![[0.5, -1.0], [0.5, -1.0], [0.5, -1.0]];
        m.fit(x.view(), &[2, 2, 2]).unwrap();
        assert_eq!(m.predict(x.view()), vec![2, 2, 2]);
        assert!(m.point_predictive(x.view())[[0, 2]] > 0.9);
    }

    #[test]
    fn rejects_bad_labels_and_shapes() {
        let mut m = DropoutMlp::new(2, 2, small_config(), 0).unwrap();
        assert!(matches!(m.fit(array![[0.0, 0.0]].view(), &[2]), Err(ModelError::InvalidLabel { label: 2, .. })));
        assert!(matches!(m.fit(Array2::zeros((0, 2)).view(), &[]), Err(ModelError::Empty)));
        assert!(m.fit(array![[0.0]].view(), &[0]).is_err());
    }

    #[test]
    fn diverging_training_reports_iteration() {
        let cfg = MlpConfig { learning_rate: 1e6, momentum: 0.99, ..small_config() };
        let mut m = DropoutMlp::new(1, 2, cfg, 0).unwrap();
        let x = array![[1e3], [-1e3], [2e3], [-2e3]];
        match m.fit(x.view(), &[0, 1, 0, 1]) {
            Err(ModelError::NonFinite { .. }) | Ok(()) => {}
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn posterior_draws_are_seeded_and_valid() {
        let m = DropoutMlp::new(2, 3, small_config(), 2).unwrap();
        let x = array![[0.1, 0.2], [1.0, -1.0], [3.0, 0.5]];
        let a = m.posterior_predictive(x.view(), 5, 99).unwrap();
        assert_eq!(a, m.posterior_predictive(x.view(), 5, 99).unwrap());
        assert_ne!(a, m.posterior_predictive(x.view(), 5, 100).unwrap());
        assert_eq!((a.samples(), a.points(), a.classes()), (5, 3, 3));
    }

    #[test]
    fn no_dropout_draws_equal_point_predictive() {
        let cfg = MlpConfig { dropout: 0.0, ..small_config() };
        let m = DropoutMlp::new(2, 2, cfg, 5).unwrap();
        let x = array![[0.3, -0.7], [2.0, 1.0]];
        let point = m.point_predictive(x.view());
        let t = m.posterior_predictive(x.view(), 4, 1).unwrap();
        for s in 0..4 {
            for i in 0..2 {
                for (a, b) in t.row(s, i).iter().zip(point.row(i)) {
                    assert!((a - b).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn checkpoint_round_trip_is_exact() {
        let mut m = DropoutMlp::new(3, 2, small_config(), 8).unwrap();
        let x = array![[0.1, 0.2, 0.3], [-1.0, 0.5, 2.0]];
        m.fit(x.view(), &[0, 1]).unwrap();
        let back = DropoutMlp::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        let mut bad = m.checkpoint();
        bad.version = 99;
        assert!(DropoutMlp::from_checkpoint(bad).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let cfg = MlpConfig { hidden: vec![4, 3], ..small_config() };
        let mut m = DropoutMlp::new(3, 3, cfg, 21).unwrap();
        let x = array![[0.5, -1.0, 0.2], [1.5, 0.3, -0.7], [-0.4, 0.9, 1.1]];
        let y = [0, 2, 1];
        let masks = m.sample_masks(5);
        let (_, grad) = m.loss_and_gradient(x.view(), &y, Some(&masks)).unwrap();
        let base = m.parameters();
        let h = 1e-5;
        let mut numeric = vec![0.0; base.len()];
        for k in 0..base.len() {
            let mut p = base.clone();
            p[k] += h;
            m.set_parameters(&p).unwrap();
            let up = m.loss_and_gradient(x.view(), &y, Some(&masks)).unwrap().0;
            p[k] -= 2.0 * h;
            m.set_parameters(&p).unwrap();
            let down = m.loss_and_gradient(x.view(), &y, Some(&masks)).unwrap().0;
            numeric[k] = (up - down) / (2.0 * h);
        }
        let diff: f64 = grad.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm: f64 =
            grad.iter().map(|a| a * a).sum::<f64>().sqrt() + numeric.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(diff / norm < 1e-6, "relative error {}", diff / norm);
    }

    #[test]
    fn embeddings_are_last_hidden_layer() {
        let cfg = MlpConfig { hidden: vec![5, 7], ..small_config() };
        let m = DropoutMlp::new(2, 2, cfg, 1).unwrap();
        let e = m.embeddings(array![[1.0, 2.0]].view()).unwrap();
        assert_eq!(e.dim(), (1, 7));
        assert!(e.iter().all(|&v| v >= 0.0));
    }
}
