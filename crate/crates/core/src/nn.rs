//! Dense multilayer perceptron with named output heads, backpropagation and RMSProp.
//!
//! A model is a stack of shared layers followed by one or more heads, each a stack of
//! layers ending in its own output activation and loss. The Q-network, the world model
//! and the curiosity model are all instances.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Linear,
    Softmax,
    Sigmoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Mse,
    CrossEntropy,
    BinaryCrossEntropy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub input_dim: usize,
    pub output_dim: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(input_dim: usize, output_dim: usize, activation: Activation) -> Self {
        LayerSpec {
            input_dim,
            output_dim,
            activation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadSpec {
    pub name: String,
    pub layers: Vec<LayerSpec>,
    pub loss: LossKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub shared: Vec<LayerSpec>,
    pub heads: Vec<HeadSpec>,
}

impl ModelSpec {
    /// Builds a spec from layer widths: `hidden` shared tanh layers, then for each head
    /// `(name, head hidden widths, output width, output activation, loss)`.
    pub fn build(
        input_dim: usize,
        hidden: &[usize],
        heads: &[(&str, &[usize], usize, Activation, LossKind)],
    ) -> Self {
        let mut shared = Vec::new();
        let mut width = input_dim;
        for &h in hidden {
            shared.push(LayerSpec::new(width, h, Activation::Tanh));
            width = h;
        }
        let heads = heads
            .iter()
            .map(|&(name, head_hidden, out, activation, loss)| {
                let mut layers = Vec::new();
                let mut w = width;
                for &h in head_hidden {
                    layers.push(LayerSpec::new(w, h, Activation::Tanh));
                    w = h;
                }
                layers.push(LayerSpec::new(w, out, activation));
                HeadSpec {
                    name: name.to_string(),
                    layers,
                    loss,
                }
            })
            .collect();
        ModelSpec { shared, heads }
    }

    pub fn input_dim(&self) -> usize {
        self.shared
            .first()
            .or_else(|| self.heads.first().and_then(|h| h.layers.first()))
            .map_or(0, |l| l.input_dim)
    }

    pub fn head_index(&self, name: &str) -> Option<usize> {
        self.heads.iter().position(|h| h.name == name)
    }

    pub fn validate(&self) -> Result<()> {
        if self.heads.is_empty() {
            return Err(Error::Spec("model needs at least one head".into()));
        }
        let check_dims = |l: &LayerSpec, where_: &str| {
            if l.input_dim == 0 || l.output_dim == 0 {
                Err(Error::Spec(format!(
                    "{where_}: layer dims must be positive (got {}x{})",
                    l.input_dim, l.output_dim
                )))
            } else {
                Ok(())
            }
        };
        let mut width = self.input_dim();
        for (i, l) in self.shared.iter().enumerate() {
            check_dims(l, &format!("shared layer {i}"))?;
            if l.input_dim != width {
                return Err(Error::Spec(format!(
                    "shared layer {i} expects {} inputs but receives {width}",
                    l.input_dim
                )));
            }
            if matches!(l.activation, Activation::Softmax | Activation::Sigmoid) {
                return Err(Error::Spec(format!(
                    "shared layer {i}: {:?} is only allowed on a head's output layer",
                    l.activation
                )));
            }
            width = l.output_dim;
        }
        for head in &self.heads {
            if head.layers.is_empty() {
                return Err(Error::Spec(format!("head `{}` has no layers", head.name)));
            }
            let mut w = width;
            for (i, l) in head.layers.iter().enumerate() {
                check_dims(l, &format!("head `{}` layer {i}", head.name))?;
                if l.input_dim != w {
                    return Err(Error::Spec(format!(
                        "head `{}` layer {i} expects {} inputs but receives {w}",
                        head.name, l.input_dim
                    )));
                }
                let last = i + 1 == head.layers.len();
                if !last && matches!(l.activation, Activation::Softmax | Activation::Sigmoid) {
                    return Err(Error::Spec(format!(
                        "head `{}` layer {i}: {:?} is only allowed on the output layer",
                        head.name, l.activation
                    )));
                }
                w = l.output_dim;
            }
            let out = head.layers.last().expect("non-empty").activation;
            let ok = match head.loss {
                LossKind::CrossEntropy => out == Activation::Softmax,
                LossKind::BinaryCrossEntropy => out == Activation::Sigmoid,
                LossKind::Mse => out != Activation::Softmax,
            };
            if !ok {
                return Err(Error::Spec(format!(
                    "head `{}`: {:?} loss cannot follow a {:?} output",
                    head.name, head.loss, out
                )));
            }
        }
        Ok(())
    }

    pub fn parameter_count(&self) -> usize {
        self.layers().map(|l| l.input_dim * l.output_dim + l.output_dim).sum()
    }

    fn layers(&self) -> impl Iterator<Item = &LayerSpec> {
        self.shared
            .iter()
            .chain(self.heads.iter().flat_map(|h| h.layers.iter()))
    }

    /// Short hex digest of the canonical JSON form of this spec.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("spec serializes");
        let digest = Sha256::digest(&json);
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Shape {
                    expected: cols,
                    actual: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Layer {
    spec: LayerSpec,
    /// `output_dim x input_dim`, row-major.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl Layer {
    fn init(spec: &LayerSpec, rng: &mut ChaCha8Rng) -> Self {
        let bound = (6.0 / (spec.input_dim + spec.output_dim) as f64).sqrt();
        let weights = (0..spec.input_dim * spec.output_dim)
            .map(|_| rng.gen_range(-bound..=bound))
            .collect();
        Layer {
            spec: spec.clone(),
            weights,
            bias: vec![0.0; spec.output_dim],
        }
    }

    /// Affine map, skipping zero inputs (the encoded states are sparse).
    fn affine(&self, input: &Matrix) -> Matrix {
        let (n_in, n_out) = (self.spec.input_dim, self.spec.output_dim);
        let mut out = Matrix::zeros(input.rows, n_out);
        let mut nonzero: Vec<(usize, f64)> = Vec::with_capacity(n_in);
        for i in 0..input.rows {
            let x = input.row(i);
            nonzero.clear();
            nonzero.extend(x.iter().copied().enumerate().filter(|(_, v)| *v != 0.0));
            let sparse = nonzero.len() * 2 < n_in;
            let o = out.row_mut(i);
            for (j, oj) in o.iter_mut().enumerate() {
                let w = &self.weights[j * n_in..(j + 1) * n_in];
                let mut acc = self.bias[j];
                if sparse {
                    for &(k, v) in &nonzero {
                        acc += w[k] * v;
                    }
                } else {
                    for (wk, xk) in w.iter().zip(x) {
                        acc += wk * xk;
                    }
                }
                *oj = acc;
            }
        }
        out
    }
}

fn activate(activation: Activation, z: &Matrix) -> Matrix {
    let mut a = z.clone();
    match activation {
        Activation::Linear => {}
        Activation::Tanh => a.data.iter_mut().for_each(|v| *v = v.tanh()),
        Activation::Sigmoid => a.data.iter_mut().for_each(|v| *v = sigmoid(*v)),
        Activation::Softmax => {
            for i in 0..a.rows {
                let row = a.row_mut(i);
                let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mut sum = 0.0;
                for v in row.iter_mut() {
                    *v = (*v - max).exp();
                    sum += *v;
                }
                row.iter_mut().for_each(|v| *v /= sum);
            }
        }
    }
    a
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn log_sum_exp(row: &[f64]) -> f64 {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// A minibatch: inputs plus, per head, an optional target matrix and optional mask.
/// Heads without targets contribute no loss.
#[derive(Debug, Clone)]
pub struct TrainBatch {
    pub inputs: Matrix,
    pub targets: Vec<Option<Matrix>>,
    /// Elementwise masks for MSE/BCE heads; for cross-entropy one column per row.
    pub masks: Vec<Option<Matrix>>,
}

impl TrainBatch {
    pub fn new(inputs: Matrix, n_heads: usize) -> Self {
        TrainBatch {
            inputs,
            targets: vec![None; n_heads],
            masks: vec![None; n_heads],
        }
    }

    pub fn with_target(mut self, head: usize, target: Matrix) -> Self {
        self.targets[head] = Some(target);
        self
    }

    pub fn with_mask(mut self, head: usize, mask: Matrix) -> Self {
        self.masks[head] = Some(mask);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmsPropConfig {
    pub rho: f64,
    pub epsilon: f64,
}

impl Default for RmsPropConfig {
    fn default() -> Self {
        RmsPropConfig {
            rho: 0.9,
            epsilon: 1e-8,
        }
    }
}

pub const DEFAULT_LEARNING_RATE: f64 = 0.001;

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    spec: ModelSpec,
    shared: Vec<Layer>,
    heads: Vec<Vec<Layer>>,
    rmsprop: RmsPropConfig,
    accumulators: Vec<f64>,
    steps: u64,
}

struct ForwardTrace {
    /// Post-activation output of every layer along each path, input included.
    shared: Vec<Matrix>,
    heads: Vec<Vec<Matrix>>,
    /// Pre-activation of each head's output layer.
    logits: Vec<Matrix>,
}

impl MlpModel {
    /// Glorot-uniform weights and zero biases, deterministic in `seed`.
    pub fn new(spec: ModelSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shared = spec.shared.iter().map(|l| Layer::init(l, &mut rng)).collect();
        let heads = spec
            .heads
            .iter()
            .map(|h| h.layers.iter().map(|l| Layer::init(l, &mut rng)).collect())
            .collect();
        let n = spec.parameter_count();
        Ok(MlpModel {
            spec,
            shared,
            heads,
            rmsprop: RmsPropConfig::default(),
            accumulators: vec![0.0; n],
            steps: 0,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn input_dim(&self) -> usize {
        self.spec.input_dim()
    }

    pub fn parameter_count(&self) -> usize {
        self.spec.parameter_count()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn set_rmsprop(&mut self, config: RmsPropConfig) {
        self.rmsprop = config;
    }

    fn layers(&self) -> impl Iterator<Item = &Layer> {
        self.shared.iter().chain(self.heads.iter().flatten())
    }

    fn layers_mut(&mut self) -> impl Iterator<Item = &mut Layer> {
        self.shared.iter_mut().chain(self.heads.iter_mut().flatten())
    }

    /// All weights and biases, flattened layer by layer (weights before bias).
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for l in self.layers() {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.parameter_count() {
            return Err(Error::Shape {
                expected: self.parameter_count(),
                actual: params.len(),
            });
        }
        let mut offset = 0;
        for l in self.layers_mut() {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&params[offset..offset + nw]);
            offset += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&params[offset..offset + nb]);
            offset += nb;
        }
        Ok(())
    }

    /// Copies parameters from a model with the same spec; optimizer state is left alone.
    pub fn copy_params_from(&mut self, other: &MlpModel) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::Spec("cannot copy parameters across specs".into()));
        }
        for (dst, src) in self.layers_mut().zip(other.layers()) {
            dst.weights.copy_from_slice(&src.weights);
            dst.bias.copy_from_slice(&src.bias);
        }
        Ok(())
    }

    /// Digest of the parameter bits, for cheap equality checks.
    pub fn param_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for l in self.layers() {
            for v in l.weights.iter().chain(&l.bias) {
                hasher.update(v.to_bits().to_le_bytes());
            }
        }
        hasher.finalize()[..16].iter().map(|b| format!("{b:02x}")).collect()
    }

    fn check_input(&self, input: &Matrix) -> Result<()> {
        if input.cols != self.input_dim() {
            return Err(Error::Shape {
                expected: self.input_dim(),
                actual: input.cols,
            });
        }
        Ok(())
    }

    fn shared_forward(&self, input: &Matrix) -> Vec<Matrix> {
        let mut acts = vec![input.clone()];
        for l in &self.shared {
            let z = l.affine(acts.last().expect("non-empty"));
            acts.push(activate(l.spec.activation, &z));
        }
        acts
    }

    fn head_forward(&self, head: usize, x: &Matrix) -> (Vec<Matrix>, Matrix) {
        let mut acts = vec![x.clone()];
        let mut logits = Matrix::zeros(0, 0);
        for l in &self.heads[head] {
            let z = l.affine(acts.last().expect("non-empty"));
            acts.push(activate(l.spec.activation, &z));
            logits = z;
        }
        (acts, logits)
    }

    /// Output of every head for a batch of input rows.
    pub fn forward(&self, input: &Matrix) -> Result<Vec<Matrix>> {
        self.check_input(input)?;
        let shared = self.shared_forward(input);
        let top = shared.last().expect("non-empty");
        Ok((0..self.heads.len())
            .map(|h| {
                let (mut acts, _) = self.head_forward(h, top);
                acts.pop().expect("non-empty")
            })
            .collect())
    }

    /// Output of a single head, skipping the others.
    pub fn forward_head(&self, input: &Matrix, head: usize) -> Result<Matrix> {
        self.check_input(input)?;
        if head >= self.heads.len() {
            return Err(Error::InvalidArgument(format!("no head with index {head}")));
        }
        let shared = self.shared_forward(input);
        let (mut acts, _) = self.head_forward(head, shared.last().expect("non-empty"));
        Ok(acts.pop().expect("non-empty"))
    }

    fn trace(&self, input: &Matrix, active: &[bool]) -> ForwardTrace {
        let shared = self.shared_forward(input);
        let top = shared.last().expect("non-empty");
        let mut heads = Vec::new();
        let mut logits = Vec::new();
        for (h, &on) in active.iter().enumerate() {
            if on {
                let (acts, z) = self.head_forward(h, top);
                heads.push(acts);
                logits.push(z);
            } else {
                heads.push(Vec::new());
                logits.push(Matrix::zeros(0, 0));
            }
        }
        ForwardTrace {
            shared,
            heads,
            logits,
        }
    }

    fn check_batch(&self, batch: &TrainBatch) -> Result<()> {
        self.check_input(&batch.inputs)?;
        if batch.targets.len() != self.heads.len() || batch.masks.len() != self.heads.len() {
            return Err(Error::Shape {
                expected: self.heads.len(),
                actual: batch.targets.len(),
            });
        }
        for (h, target) in batch.targets.iter().enumerate() {
            let Some(t) = target else { continue };
            let out = self.spec.heads[h].layers.last().expect("non-empty").output_dim;
            if t.rows != batch.inputs.rows {
                return Err(Error::Shape {
                    expected: batch.inputs.rows,
                    actual: t.rows,
                });
            }
            if t.cols != out {
                return Err(Error::Shape {
                    expected: out,
                    actual: t.cols,
                });
            }
            if let Some(m) = &batch.masks[h] {
                let cols = if self.spec.heads[h].loss == LossKind::CrossEntropy { 1 } else { out };
                if m.rows != t.rows || m.cols != cols {
                    return Err(Error::Shape {
                        expected: t.rows * cols,
                        actual: m.rows * m.cols,
                    });
                }
            }
        }
        Ok(())
    }

    /// Loss and its gradient with respect to [`MlpModel::params`], without updating.
    pub fn loss_and_gradient(&self, batch: &TrainBatch) -> Result<(f64, Vec<f64>)> {
        self.check_batch(batch)?;
        let n = batch.inputs.rows as f64;
        let active: Vec<bool> = batch.targets.iter().map(Option::is_some).collect();
        let trace = self.trace(&batch.inputs, &active);

        let mut loss = 0.0;
        let mut head_grads: Vec<Vec<(Vec<f64>, Vec<f64>)>> = Vec::new();
        let top_width = trace.shared.last().expect("non-empty").cols;
        let mut d_top = Matrix::zeros(batch.inputs.rows, top_width);

        for (h, target) in batch.targets.iter().enumerate() {
            let Some(t) = target else {
                head_grads.push(
                    self.heads[h]
                        .iter()
                        .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.bias.len()]))
                        .collect(),
                );
                continue;
            };
            let mask = batch.masks[h].as_ref();
            let acts = &trace.heads[h];
            let out = acts.last().expect("non-empty");
            let logits = &trace.logits[h];
            let spec = &self.spec.heads[h];
            let out_act = spec.layers.last().expect("non-empty").activation;
            let mut dz = Matrix::zeros(out.rows, out.cols);
            match spec.loss {
                LossKind::Mse => {
                    for i in 0..out.rows {
                        for j in 0..out.cols {
                            let m = mask.map_or(1.0, |m| m.get(i, j));
                            let y = out.get(i, j);
                            let diff = y - t.get(i, j);
                            loss += m * diff * diff / n;
                            let da = 2.0 * m * diff / n;
                            let deriv = match out_act {
                                Activation::Linear => 1.0,
                                Activation::Tanh => 1.0 - y * y,
                                Activation::Sigmoid => y * (1.0 - y),
                                Activation::Softmax => unreachable!("rejected by validate"),
                            };
                            dz.data[i * out.cols + j] = da * deriv;
                        }
                    }
                }
                LossKind::CrossEntropy => {
                    for i in 0..out.rows {
                        let m = mask.map_or(1.0, |m| m.get(i, 0));
                        let z = logits.row(i);
                        let lse = log_sum_exp(z);
                        let t_row = t.row(i);
                        let t_sum: f64 = t_row.iter().sum();
                        for j in 0..out.cols {
                            loss -= m * t_row[j] * (z[j] - lse) / n;
                            dz.data[i * out.cols + j] = m * (t_sum * out.get(i, j) - t_row[j]) / n;
                        }
                    }
                }
                LossKind::BinaryCrossEntropy => {
                    for i in 0..out.rows {
                        for j in 0..out.cols {
                            let m = mask.map_or(1.0, |m| m.get(i, j));
                            let z = logits.get(i, j);
                            let y = t.get(i, j);
                            loss += m * (z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()) / n;
                            dz.data[i * out.cols + j] = m * (out.get(i, j) - y) / n;
                        }
                    }
                }
            }
            let (grads, d_in) = backprop_stack(&self.heads[h], acts, dz);
            for (acc, v) in d_top.data.iter_mut().zip(&d_in.data) {
                *acc += v;
            }
            head_grads.push(grads);
        }

        let shared_grads = if self.shared.is_empty() {
            Vec::new()
        } else {
            let top = trace.shared.last().expect("non-empty");
            let last_act = self.shared.last().expect("non-empty").spec.activation;
            let dz = apply_activation_grad(last_act, top, d_top);
            backprop_stack(&self.shared, &trace.shared, dz).0
        };

        let mut grad = Vec::with_capacity(self.parameter_count());
        for (gw, gb) in shared_grads.into_iter().chain(head_grads.into_iter().flatten()) {
            grad.extend(gw);
            grad.extend(gb);
        }
        Ok((loss, grad))
    }

    /// One RMSProp step on `batch`; returns the pre-update loss.
    pub fn train_minibatch(&mut self, batch: &TrainBatch, learning_rate: f64) -> Result<f64> {
        let (loss, grad) = self.loss_and_gradient(batch)?;
        self.steps += 1;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numeric { step: self.steps });
        }
        let RmsPropConfig { rho, epsilon } = self.rmsprop;
        let mut params = self.params();
        let mut acc = self.accumulators.clone();
        for ((p, a), g) in params.iter_mut().zip(acc.iter_mut()).zip(&grad) {
            *a = rho * *a + (1.0 - rho) * g * g;
            *p -= learning_rate * g / (*a + epsilon).sqrt();
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Numeric { step: self.steps });
        }
        self.set_params(&params)?;
        self.accumulators = acc;
        Ok(loss)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::io::write_json(path, &self.to_checkpoint())
    }

    /// Loads a checkpoint, checking format, version and spec digest.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ckpt: ModelCheckpoint = serde_json::from_str(&text)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        Self::from_checkpoint(ckpt)
    }

    /// Loads a checkpoint and requires it to carry `expected`.
    pub fn load_expecting(path: &Path, expected: &ModelSpec) -> Result<Self> {
        let model = Self::load(path)?;
        let (want, have) = (expected.hash(), model.spec.hash());
        if want != have {
            return Err(Error::Format(format!(
                "spec hash mismatch: expected {want}, found {have}"
            )));
        }
        Ok(model)
    }

    pub fn to_checkpoint(&self) -> ModelCheckpoint {
        ModelCheckpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            spec_hash: self.spec.hash(),
            spec: self.spec.clone(),
            rmsprop: self.rmsprop,
            steps: self.steps,
            params: self.params(),
            accumulators: self.accumulators.clone(),
        }
    }

    pub fn from_checkpoint(ckpt: ModelCheckpoint) -> Result<Self> {
        if ckpt.format != CHECKPOINT_FORMAT {
            return Err(Error::Format(format!("unknown format `{}`", ckpt.format)));
        }
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::Format(format!(
                "version mismatch: expected {CHECKPOINT_VERSION}, found {}",
                ckpt.version
            )));
        }
        let actual = ckpt.spec.hash();
        if actual != ckpt.spec_hash {
            return Err(Error::Format(format!(
                "spec hash mismatch: expected {}, found {actual}",
                ckpt.spec_hash
            )));
        }
        ckpt.spec.validate().map_err(|e| Error::Format(e.to_string()))?;
        let mut model = MlpModel::new(ckpt.spec, 0)?;
        model
            .set_params(&ckpt.params)
            .map_err(|e| Error::Format(format!("parameters: {e}")))?;
        if ckpt.accumulators.len() != model.accumulators.len() {
            return Err(Error::Format("optimizer state has the wrong length".into()));
        }
        model.accumulators = ckpt.accumulators;
        model.rmsprop = ckpt.rmsprop;
        model.steps = ckpt.steps;
        Ok(model)
    }
}

const CHECKPOINT_FORMAT: &str = "scddq-mlp";
const CHECKPOINT_VERSION: u32 = 1;

/// Serialized model: spec, flat parameters and RMSProp accumulators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCheckpoint {
    pub format: String,
    pub version: u32,
    pub spec_hash: String,
    pub spec: ModelSpec,
    pub rmsprop: RmsPropConfig,
    pub steps: u64,
    pub params: Vec<f64>,
    pub accumulators: Vec<f64>,
}

fn apply_activation_grad(activation: Activation, a: &Matrix, mut da: Matrix) -> Matrix {
    match activation {
        Activation::Linear => {}
        Activation::Tanh => {
            for (d, y) in da.data.iter_mut().zip(&a.data) {
                *d *= 1.0 - y * y;
            }
        }
        Activation::Sigmoid => {
            for (d, y) in da.data.iter_mut().zip(&a.data) {
                *d *= y * (1.0 - y);
            }
        }
        Activation::Softmax => unreachable!("softmax never feeds another layer"),
    }
    da
}

/// Backpropagates `dz` (gradient at the last layer's pre-activation) through a stack.
/// `acts[k]` is the input to layer `k`. Returns per-layer (weight, bias) gradients and
/// the gradient with respect to the stack input.
fn backprop_stack(layers: &[Layer], acts: &[Matrix], mut dz: Matrix) -> (Vec<(Vec<f64>, Vec<f64>)>, Matrix) {
    let mut grads = vec![(Vec::new(), Vec::new()); layers.len()];
    for k in (0..layers.len()).rev() {
        let layer = &layers[k];
        let input = &acts[k];
        let (n_in, n_out) = (layer.spec.input_dim, layer.spec.output_dim);
        let mut gw = vec![0.0; n_in * n_out];
        let mut gb = vec![0.0; n_out];
        let mut d_in = Matrix::zeros(input.rows, n_in);
        for i in 0..input.rows {
            let x = input.row(i);
            let dzi = dz.row(i);
            let dxi = d_in.row_mut(i);
            for j in 0..n_out {
                let g = dzi[j];
                if g == 0.0 {
                    continue;
                }
                gb[j] += g;
                let w = &layer.weights[j * n_in..(j + 1) * n_in];
                let gwj = &mut gw[j * n_in..(j + 1) * n_in];
                for kk in 0..n_in {
                    gwj[kk] += g * x[kk];
                    dxi[kk] += g * w[kk];
                }
            }
        }
        grads[k] = (gw, gb);
        dz = if k > 0 {
            apply_activation_grad(layers[k - 1].spec.activation, input, d_in)
        } else {
            d_in
        };
    }
    (grads, dz)
}
