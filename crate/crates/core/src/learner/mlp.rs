use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use super::{Activation, MlpConfig, Mode};
use crate::data::LabeledSample;
use crate::error::{Error, Result};
use crate::rng::{self, stream, Rng};

const BN_EPS: f64 = 1e-5;
const BN_MOMENTUM: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Dense {
    /// `fan_in × fan_out`
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct BatchNorm {
    pub gamma: Array1<f64>,
    pub beta: Array1<f64>,
    pub running_mean: Array1<f64>,
    pub running_var: Array1<f64>,
}

impl BatchNorm {
    fn new(width: usize) -> Self {
        Self {
            gamma: Array1::ones(width),
            beta: Array1::zeros(width),
            running_mean: Array1::zeros(width),
            running_var: Array1::ones(width),
        }
    }
}

/// A labeled mini-batch, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Minibatch {
    pub inputs: Array2<f64>,
    pub labels: Vec<usize>,
}

impl Minibatch {
    pub fn from_rows<'a>(rows: impl IntoIterator<Item = (&'a [f64], usize)>, dim: usize) -> Self {
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for (x, y) in rows {
            data.extend_from_slice(x);
            labels.push(y);
        }
        let inputs =
            Array2::from_shape_vec((labels.len(), dim), data).expect("rows share the input width");
        Self { inputs, labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Per-parameter gradients, laid out like the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub(crate) hidden: Vec<HiddenGrads>,
    pub(crate) output: DenseGrads,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DenseGrads {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct HiddenGrads {
    pub dense: DenseGrads,
    pub gamma: Array1<f64>,
    pub beta: Array1<f64>,
}

impl Gradients {
    /// Flat views in the same order as [`MlpClassifier::parameters_mut`].
    pub fn tensors(&self) -> Vec<(String, &[f64])> {
        let mut out = Vec::new();
        for (i, h) in self.hidden.iter().enumerate() {
            out.push((format!("hidden{i}.w"), h.dense.w.as_slice().unwrap()));
            out.push((format!("hidden{i}.b"), h.dense.b.as_slice().unwrap()));
            out.push((format!("hidden{i}.gamma"), h.gamma.as_slice().unwrap()));
            out.push((format!("hidden{i}.beta"), h.beta.as_slice().unwrap()));
        }
        out.push(("output.w".into(), self.output.w.as_slice().unwrap()));
        out.push(("output.b".into(), self.output.b.as_slice().unwrap()));
        out
    }

    pub fn zeros_like(model: &MlpClassifier) -> Self {
        let dense = |d: &Dense| DenseGrads {
            w: Array2::zeros(d.w.raw_dim()),
            b: Array1::zeros(d.b.raw_dim()),
        };
        Self {
            hidden: model
                .hidden
                .iter()
                .map(|(d, bn)| HiddenGrads {
                    dense: dense(d),
                    gamma: Array1::zeros(bn.gamma.raw_dim()),
                    beta: Array1::zeros(bn.beta.raw_dim()),
                })
                .collect(),
            output: dense(&model.output),
        }
    }
}

struct HiddenCache {
    input: Array2<f64>,
    xhat: Array2<f64>,
    inv_std: Array1<f64>,
    batch_stats: Option<(Array1<f64>, Array1<f64>)>,
    pre_activation: Array2<f64>,
    mask: Option<Array2<f64>>,
}

struct ForwardCache {
    hidden: Vec<HiddenCache>,
    last: Array2<f64>,
    logits: Array2<f64>,
}

/// Fully-connected classifier from `input_dim` features to `num_classes`
/// softmax outputs.
#[derive(Debug, Clone)]
pub struct MlpClassifier {
    pub(crate) config: MlpConfig,
    pub(crate) input_dim: usize,
    pub(crate) num_classes: usize,
    pub(crate) hidden: Vec<(Dense, BatchNorm)>,
    pub(crate) output: Dense,
    pub(crate) mode: Mode,
    dropout_rng: Rng,
}

impl PartialEq for MlpClassifier {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
            && self.input_dim == other.input_dim
            && self.num_classes == other.num_classes
            && self.hidden == other.hidden
            && self.output == other.output
    }
}

fn he_dense(fan_in: usize, fan_out: usize, rng: &mut Rng) -> Dense {
    let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).unwrap();
    Dense {
        w: Array2::from_shape_simple_fn((fan_in, fan_out), || normal.sample(rng)),
        b: Array1::zeros(fan_out),
    }
}

fn activate(kind: Activation, y: f64) -> f64 {
    match kind {
        Activation::Relu => y.max(0.0),
        Activation::Elu if y > 0.0 => y,
        Activation::Elu => y.exp_m1(),
    }
}

fn activation_grad(kind: Activation, y: f64) -> f64 {
    match (kind, y > 0.0) {
        (_, true) => 1.0,
        (Activation::Relu, false) => 0.0,
        (Activation::Elu, false) => y.exp(),
    }
}

fn check_finite(a: &Array2<f64>, layer: usize) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numeric {
            layer,
            message: "non-finite activation".into(),
        })
    }
}

fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut p = logits.clone();
    for mut row in p.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    p
}

/// Mean cross-entropy computed through log-sum-exp.
fn cross_entropy(logits: &Array2<f64>, labels: &[usize]) -> f64 {
    let total: f64 = logits
        .rows()
        .into_iter()
        .zip(labels)
        .map(|(row, &y)| {
            let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            lse - row[y]
        })
        .sum();
    total / labels.len() as f64
}

/// Index of the largest entry; ties go to the lowest index.
pub(crate) fn argmax(row: ndarray::ArrayView1<f64>) -> usize {
    row.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        })
        .0
}

impl MlpClassifier {
    /// He-initialized weights, zero biases, identity batch norm. Deterministic
    /// under `config.seed`.
    pub fn new(config: MlpConfig, input_dim: usize, num_classes: usize) -> Result<Self> {
        config.validate()?;
        if input_dim == 0 || num_classes == 0 {
            return Err(Error::Config(
                "input dimension and class count must be positive".into(),
            ));
        }
        let mut init = rng::seeded(config.seed, stream::INIT);
        let mut fan_in = input_dim;
        let mut hidden = Vec::with_capacity(config.layer_sizes.len());
        for &width in &config.layer_sizes {
            hidden.push((he_dense(fan_in, width, &mut init), BatchNorm::new(width)));
            fan_in = width;
        }
        let output = he_dense(fan_in, num_classes, &mut init);
        Ok(Self {
            dropout_rng: rng::seeded(config.seed, stream::DROPOUT),
            config,
            input_dim,
            num_classes,
            hidden,
            output,
            mode: Mode::Train,
        })
    }

    pub fn config(&self) -> &MlpConfig {
        &self.config
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    /// `(fan_in, fan_out)` of every affine layer, input to output.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        self.hidden
            .iter()
            .map(|(d, _)| d.w.dim())
            .chain(std::iter::once(self.output.w.dim()))
            .collect()
    }

    /// Trainable tensors as flat mutable slices, in a fixed order.
    pub fn parameters_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut out = Vec::new();
        for (i, (d, bn)) in self.hidden.iter_mut().enumerate() {
            out.push((format!("hidden{i}.w"), d.w.as_slice_mut().unwrap()));
            out.push((format!("hidden{i}.b"), d.b.as_slice_mut().unwrap()));
            out.push((format!("hidden{i}.gamma"), bn.gamma.as_slice_mut().unwrap()));
            out.push((format!("hidden{i}.beta"), bn.beta.as_slice_mut().unwrap()));
        }
        out.push(("output.w".into(), self.output.w.as_slice_mut().unwrap()));
        out.push(("output.b".into(), self.output.b.as_slice_mut().unwrap()));
        out
    }

    /// Copies of every trainable tensor, same order as [`Self::parameters_mut`].
    pub fn parameters(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        for (d, bn) in &self.hidden {
            out.push(d.w.iter().copied().collect());
            out.push(d.b.to_vec());
            out.push(bn.gamma.to_vec());
            out.push(bn.beta.to_vec());
        }
        out.push(self.output.w.iter().copied().collect());
        out.push(self.output.b.to_vec());
        out
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.input_dim {
            return Err(Error::Data(format!(
                "input width {} does not match model width {}",
                x.ncols(),
                self.input_dim
            )));
        }
        if x.nrows() == 0 {
            return Err(Error::Usage("empty input batch".into()));
        }
        check_finite(&x.to_owned(), 0)
    }

    fn forward_cached(
        &self,
        x: ArrayView2<f64>,
        mode: Mode,
        mut dropout: Option<&mut Rng>,
    ) -> Result<ForwardCache> {
        let m = x.nrows();
        let keep = self.config.dropout_keep;
        let mut a = x.to_owned();
        let mut caches = Vec::with_capacity(self.hidden.len());
        for (layer, (dense, bn)) in self.hidden.iter().enumerate() {
            let z = a.dot(&dense.w) + &dense.b;
            let (xhat, inv_std, batch_stats) = if mode == Mode::Train && m >= 2 {
                let mean = z.mean_axis(Axis(0)).unwrap();
                let centered = &z - &mean;
                let var = centered.mapv(|v| v * v).mean_axis(Axis(0)).unwrap();
                let inv_std = var.mapv(|v| 1.0 / (v + BN_EPS).sqrt());
                (centered * &inv_std, inv_std, Some((mean, var)))
            } else {
                let inv_std = bn.running_var.mapv(|v| 1.0 / (v + BN_EPS).sqrt());
                ((&z - &bn.running_mean) * &inv_std, inv_std, None)
            };
            let pre = &xhat * &bn.gamma + &bn.beta;
            let mut out = pre.mapv(|y| activate(self.config.activation, y));
            let mask = match (&mut dropout, mode) {
                (Some(rng), Mode::Train) if keep < 1.0 => {
                    let mask = Array2::from_shape_simple_fn(out.raw_dim(), || {
                        if rng.random::<f64>() < keep {
                            1.0 / keep
                        } else {
                            0.0
                        }
                    });
                    out *= &mask;
                    Some(mask)
                }
                _ => None,
            };
            check_finite(&out, layer + 1)?;
            caches.push(HiddenCache {
                input: std::mem::replace(&mut a, out),
                xhat,
                inv_std,
                batch_stats,
                pre_activation: pre,
                mask,
            });
        }
        let logits = a.dot(&self.output.w) + &self.output.b;
        check_finite(&logits, self.hidden.len() + 1)?;
        Ok(ForwardCache {
            hidden: caches,
            last: a,
            logits,
        })
    }

    /// Class probabilities, one row per input row. Train mode draws fresh
    /// dropout masks and, for batches of two or more, normalizes with batch
    /// statistics (running statistics are not updated here).
    pub fn forward(&mut self, x: ArrayView2<f64>, mode: Mode) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        let mut rng = self.dropout_rng.clone();
        let cache = self.forward_cached(x, mode, Some(&mut rng))?;
        self.dropout_rng = rng;
        Ok(softmax_rows(&cache.logits))
    }

    /// Eval-mode probabilities.
    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        Ok(softmax_rows(
            &self.forward_cached(x, Mode::Eval, None)?.logits,
        ))
    }

    /// Mean cross-entropy without dropout.
    pub fn loss(&self, x: ArrayView2<f64>, labels: &[usize], mode: Mode) -> Result<f64> {
        self.check_input(&x)?;
        Ok(cross_entropy(
            &self.forward_cached(x, mode, None)?.logits,
            labels,
        ))
    }

    fn backward(&self, cache: &ForwardCache, labels: &[usize]) -> Gradients {
        let m = labels.len() as f64;
        let mut delta = softmax_rows(&cache.logits);
        for (mut row, &y) in delta.rows_mut().into_iter().zip(labels) {
            row[y] -= 1.0;
        }
        delta /= m;

        let output = DenseGrads {
            w: cache.last.t().dot(&delta),
            b: delta.sum_axis(Axis(0)),
        };
        let mut upstream = delta.dot(&self.output.w.t());
        let mut hidden = Vec::with_capacity(self.hidden.len());
        for ((dense, bn), c) in self.hidden.iter().zip(&cache.hidden).rev() {
            if let Some(mask) = &c.mask {
                upstream *= mask;
            }
            let act = self.config.activation;
            Zip::from(&mut upstream)
                .and(&c.pre_activation)
                .for_each(|g, &y| *g *= activation_grad(act, y));
            let gamma = (&upstream * &c.xhat).sum_axis(Axis(0));
            let beta = upstream.sum_axis(Axis(0));
            let dxhat = &upstream * &bn.gamma;
            let dz = if c.batch_stats.is_some() {
                let sum_dxhat = dxhat.sum_axis(Axis(0));
                let sum_dxhat_xhat = (&dxhat * &c.xhat).sum_axis(Axis(0));
                let inner = &dxhat * m - &sum_dxhat - &c.xhat * &sum_dxhat_xhat;
                inner * &(&c.inv_std / m)
            } else {
                dxhat * &c.inv_std
            };
            hidden.push(HiddenGrads {
                dense: DenseGrads {
                    w: c.input.t().dot(&dz),
                    b: dz.sum_axis(Axis(0)),
                },
                gamma,
                beta,
            });
            upstream = dz.dot(&dense.w.t());
        }
        hidden.reverse();
        Gradients { hidden, output }
    }

    /// Loss and backpropagated gradients in train mode, without dropout and
    /// without touching running statistics.
    pub fn gradients(&self, x: ArrayView2<f64>, labels: &[usize]) -> Result<(f64, Gradients)> {
        self.check_input(&x)?;
        let cache = self.forward_cached(x, Mode::Train, None)?;
        Ok((
            cross_entropy(&cache.logits, labels),
            self.backward(&cache, labels),
        ))
    }

    /// SGD step `w ← (1 − lr·λ)·w − lr·g`, with decay `λ` on weight matrices only.
    pub fn apply_gradients(&mut self, grads: &Gradients) {
        let lr = self.config.learning_rate;
        let shrink = 1.0 - lr * self.config.weight_decay;
        let step_dense = |d: &mut Dense, g: &DenseGrads| {
            Zip::from(&mut d.w)
                .and(&g.w)
                .for_each(|w, &g| *w = shrink * *w - lr * g);
            Zip::from(&mut d.b).and(&g.b).for_each(|b, &g| *b -= lr * g);
        };
        for ((dense, bn), g) in self.hidden.iter_mut().zip(&grads.hidden) {
            step_dense(dense, &g.dense);
            Zip::from(&mut bn.gamma)
                .and(&g.gamma)
                .for_each(|p, &g| *p -= lr * g);
            Zip::from(&mut bn.beta)
                .and(&g.beta)
                .for_each(|p, &g| *p -= lr * g);
        }
        step_dense(&mut self.output, &grads.output);
    }

    /// One SGD step on `batch`. Returns the loss before the update.
    pub fn train_minibatch(&mut self, batch: &Minibatch) -> Result<f64> {
        self.check_input(&batch.inputs.view())?;
        if let Some(&bad) = batch.labels.iter().find(|&&y| y >= self.num_classes) {
            return Err(Error::Data(format!(
                "label {bad} >= {} classes",
                self.num_classes
            )));
        }
        let mut rng = self.dropout_rng.clone();
        let cache = self.forward_cached(batch.inputs.view(), Mode::Train, Some(&mut rng))?;
        self.dropout_rng = rng;
        let loss = cross_entropy(&cache.logits, &batch.labels);
        if !loss.is_finite() {
            return Err(Error::Numeric {
                layer: self.hidden.len() + 1,
                message: format!("loss is {loss}"),
            });
        }
        let grads = self.backward(&cache, &batch.labels);

        let m = batch.len() as f64;
        for ((_, bn), c) in self.hidden.iter_mut().zip(&cache.hidden) {
            if let Some((mean, var)) = &c.batch_stats {
                let unbiased = var * (m / (m - 1.0));
                bn.running_mean = &bn.running_mean * BN_MOMENTUM + mean * (1.0 - BN_MOMENTUM);
                bn.running_var = &bn.running_var * BN_MOMENTUM + unbiased * (1.0 - BN_MOMENTUM);
            }
        }
        self.apply_gradients(&grads);
        Ok(loss)
    }

    /// Fraction of rows whose arg-max class (lowest index on ties) matches the
    /// label, computed in eval mode.
    pub fn accuracy(&self, x: ArrayView2<f64>, labels: &[usize]) -> Result<f64> {
        if labels.is_empty() {
            return Err(Error::Usage("cannot evaluate on an empty test set".into()));
        }
        let probs = self.predict_proba(x)?;
        let correct = probs
            .rows()
            .into_iter()
            .zip(labels)
            .filter(|(row, &y)| argmax(row.view()) == y)
            .count();
        Ok(correct as f64 / labels.len() as f64)
    }

    pub fn evaluate_accuracy(&self, samples: &[LabeledSample]) -> Result<f64> {
        if samples.is_empty() {
            return Err(Error::Usage("cannot evaluate on an empty test set".into()));
        }
        let batch = Minibatch::from_rows(
            samples
                .iter()
                .map(|s| (s.features.as_slice(), s.class_label)),
            self.input_dim,
        );
        self.accuracy(batch.inputs.view(), &batch.labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(keep: f64) -> MlpConfig {
        MlpConfig {
            layer_sizes: vec![4],
            activation: Activation::Relu,
            dropout_keep: keep,
            weight_decay: 0.0,
            learning_rate: 0.1,
            batch_size: 4,
            seed: 3,
        }
    }

    fn random_inputs(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
        let mut g = rng::seeded(seed, 99);
        Array2::from_shape_simple_fn((rows, cols), || g.random_range(-2.0..2.0))
    }

    #[test]
    fn same_seed_same_parameters() {
        let a = MlpClassifier::new(MlpConfig::icub1(), 64, 10).unwrap();
        let b = MlpClassifier::new(MlpConfig::icub1(), 64, 10).unwrap();
        assert_eq!(a.parameters(), b.parameters());
    }

    #[test]
    fn icub_layer_shapes() {
        let m = MlpClassifier::new(MlpConfig::icub1(), 2048, 10).unwrap();
        assert_eq!(
            m.layer_shapes(),
            vec![(2048, 300), (300, 150), (150, 100), (100, 10)]
        );
    }

    #[test]
    fn no_hidden_layers_is_linear() {
        let cfg = MlpConfig {
            layer_sizes: vec![],
            ..tiny(1.0)
        };
        let m = MlpClassifier::new(cfg, 5, 3).unwrap();
        assert_eq!(m.layer_shapes(), vec![(5, 3)]);
    }

    #[test]
    fn zero_weights_give_uniform_rows() {
        let mut m = MlpClassifier::new(tiny(1.0), 5, 4).unwrap();
        for (_, p) in m.parameters_mut() {
            p.iter_mut().for_each(|v| *v = 0.0);
        }
        let p = m.predict_proba(random_inputs(6, 5, 1).view()).unwrap();
        assert!(p.iter().all(|&v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn eval_is_deterministic_and_rows_sum_to_one() {
        let mut m = MlpClassifier::new(tiny(0.5), 5, 3).unwrap();
        let x = random_inputs(1000, 5, 2);
        let a = m.forward(x.view(), Mode::Eval).unwrap();
        let b = m.forward(x.view(), Mode::Eval).unwrap();
        assert_eq!(a, b);
        let t = m.forward(x.view(), Mode::Train).unwrap();
        for row in a.rows().into_iter().chain(t.rows()) {
            assert!(row.iter().all(|&v| (0.0..=1.0).contains(&v)));
            assert!((row.sum() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_learning_rate_changes_nothing() {
        let cfg = MlpConfig {
            learning_rate: 0.0,
            weight_decay: 0.3,
            ..tiny(0.5)
        };
        let mut m = MlpClassifier::new(cfg, 5, 3).unwrap();
        let before = m.parameters();
        let batch = Minibatch {
            inputs: random_inputs(4, 5, 3),
            labels: vec![0, 1, 2, 1],
        };
        m.train_minibatch(&batch).unwrap();
        let after = m.parameters();
        for (a, b) in before.iter().flatten().zip(after.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn weight_decay_shrinks_weights_exactly() {
        let cfg = MlpConfig {
            learning_rate: 0.1,
            weight_decay: 0.5,
            ..tiny(1.0)
        };
        let mut m = MlpClassifier::new(cfg, 5, 3).unwrap();
        let before = m.clone();
        m.apply_gradients(&Gradients::zeros_like(&before));
        let factor = 1.0 - 0.1 * 0.5;
        for ((d0, _), (d1, _)) in before.hidden.iter().zip(&m.hidden) {
            Zip::from(&d0.w)
                .and(&d1.w)
                .for_each(|&a, &b| assert_eq!(b, a * factor));
            assert_eq!(d0.b, d1.b);
        }
        Zip::from(&before.output.w)
            .and(&m.output.w)
            .for_each(|&a, &b| assert_eq!(b, a * factor));
    }

    #[test]
    fn overfits_a_single_sample() {
        let mut m = MlpClassifier::new(
            MlpConfig {
                learning_rate: 0.05,
                ..tiny(1.0)
            },
            5,
            3,
        )
        .unwrap();
        let x = random_inputs(1, 5, 4);
        let batch = Minibatch {
            inputs: x.clone(),
            labels: vec![2],
        };
        for _ in 0..200 {
            m.train_minibatch(&batch).unwrap();
        }
        assert!(m.predict_proba(x.view()).unwrap()[[0, 2]] > 0.99);
    }

    #[test]
    fn constant_model_accuracy() {
        let mut m = MlpClassifier::new(
            MlpConfig {
                layer_sizes: vec![],
                ..tiny(1.0)
            },
            2,
            3,
        )
        .unwrap();
        for (_, p) in m.parameters_mut() {
            p.iter_mut().for_each(|v| *v = 0.0);
        }
        // all-zero logits: argmax tie resolves to class 0
        let x = random_inputs(10, 2, 5);
        assert_eq!(m.accuracy(x.view(), &[0; 10]).unwrap(), 1.0);
        assert_eq!(m.accuracy(x.view(), &[1; 10]).unwrap(), 0.0);
        assert!(matches!(m.accuracy(x.view(), &[]), Err(Error::Usage(_))));
    }

    #[test]
    fn rejects_non_finite_input_and_bad_width() {
        let m = MlpClassifier::new(tiny(1.0), 2, 2).unwrap();
        let mut x = random_inputs(2, 2, 6);
        x[[0, 0]] = f64::NAN;
        assert!(matches!(
            m.predict_proba(x.view()),
            Err(Error::Numeric { layer: 0, .. })
        ));
        assert!(matches!(
            m.predict_proba(random_inputs(2, 3, 6).view()),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn invalid_configs() {
        for cfg in [
            MlpConfig {
                layer_sizes: vec![0],
                ..tiny(1.0)
            },
            MlpConfig {
                dropout_keep: 0.0,
                ..tiny(1.0)
            },
            MlpConfig {
                dropout_keep: 1.5,
                ..tiny(1.0)
            },
            MlpConfig {
                batch_size: 0,
                ..tiny(1.0)
            },
        ] {
            assert!(matches!(
                MlpClassifier::new(cfg, 2, 2),
                Err(Error::Config(_))
            ));
        }
    }
}
