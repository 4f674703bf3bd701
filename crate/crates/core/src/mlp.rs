//! Five-layer fully connected scoring network with batch normalization and
//! dropout.
//!
//! Hidden layers compute affine -> batch norm -> ReLU -> dropout; the output
//! layer is affine -> sigmoid. Training mode normalizes with batch statistics
//! and applies dropout; inference mode uses the running statistics and is a
//! pure function of its input.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureSchema;

pub const HIDDEN_LAYERS: usize = 4;
pub const DEFAULT_HIDDEN: [usize; HIDDEN_LAYERS] = [64, 64, 32, 16];
pub const BN_EPSILON: f64 = 1e-8;
pub const BN_MOMENTUM: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// Row-major `rows x cols` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            data.extend_from_slice(r.as_ref());
        }
        Matrix { rows: rows.len(), cols, data }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Column mean and biased variance.
    pub fn column_stats(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.rows as f64;
        let mut mean = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (m, x) in mean.iter_mut().zip(self.row(r)) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; self.cols];
        for r in 0..self.rows {
            for ((v, x), m) in var.iter_mut().zip(self.row(r)).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        var.iter_mut().for_each(|v| *v /= n);
        (mean, var)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    /// `outputs x inputs`, row-major.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Dense {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    fn forward(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.rows, self.outputs);
        for b in 0..x.rows {
            let input = x.row(b);
            let row = out.row_mut(b);
            for (o, z) in row.iter_mut().enumerate() {
                let w = &self.weights[o * self.inputs..(o + 1) * self.inputs];
                *z = self.biases[o] + dot(w, input);
            }
        }
        out
    }

    fn forward_one(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend((0..self.outputs).map(|o| {
            self.biases[o] + dot(&self.weights[o * self.inputs..(o + 1) * self.inputs], x)
        }));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchNorm {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
}

impl BatchNorm {
    fn identity(width: usize) -> Self {
        BatchNorm {
            gamma: vec![1.0; width],
            beta: vec![0.0; width],
            running_mean: vec![0.0; width],
            running_var: vec![1.0; width],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub(crate) layer_dims: Vec<usize>,
    pub(crate) dense: Vec<Dense>,
    pub(crate) norms: Vec<BatchNorm>,
    pub(crate) dropout_rate: f64,
    pub(crate) bn_epsilon: f64,
    pub(crate) bn_momentum: f64,
    pub(crate) schema: FeatureSchema,
}

/// Per-hidden-layer values kept from a training-mode forward pass.
struct HiddenCache {
    input: Matrix,
    xhat: Matrix,
    inv_std: Vec<f64>,
    mean: Vec<f64>,
    var: Vec<f64>,
    /// Batch-norm output before the ReLU.
    normalized: Matrix,
    /// Dropout multipliers (0 or 1/(1-p)); empty when dropout is off.
    mask: Vec<f64>,
}

pub(crate) struct ForwardCache {
    hidden: Vec<HiddenCache>,
    last: Matrix,
    logits: Vec<f64>,
}

impl ForwardCache {
    pub(crate) fn batch_stats(&self) -> impl Iterator<Item = (&[f64], &[f64])> {
        self.hidden.iter().map(|h| (h.mean.as_slice(), h.var.as_slice()))
    }
}

impl MlpModel {
    /// Randomly initialized model (He-uniform weights, zero biases, identity
    /// batch norm).
    pub fn new<R: Rng + ?Sized>(
        schema: FeatureSchema,
        hidden: [usize; HIDDEN_LAYERS],
        dropout_rate: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let mut model = Self::zeros(schema, hidden, dropout_rate)?;
        for layer in &mut model.dense {
            let limit = (6.0 / layer.inputs as f64).sqrt();
            for w in &mut layer.weights {
                *w = rng.gen_range(-limit..limit);
            }
        }
        Ok(model)
    }

    /// Model with all weights and biases zero and identity batch norm.
    pub fn zeros(schema: FeatureSchema, hidden: [usize; HIDDEN_LAYERS], dropout_rate: f64) -> Result<Self> {
        schema.validate()?;
        if !(0.0..1.0).contains(&dropout_rate) {
            return Err(Error::Model(format!("dropout rate must be in [0, 1), got {dropout_rate}")));
        }
        if hidden.contains(&0) {
            return Err(Error::Model("hidden layer widths must be positive".into()));
        }
        let mut layer_dims = vec![schema.dimension()];
        layer_dims.extend(hidden);
        layer_dims.push(1);
        let dense = layer_dims.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect();
        let norms = hidden.iter().map(|&h| BatchNorm::identity(h)).collect();
        Ok(MlpModel {
            layer_dims,
            dense,
            norms,
            dropout_rate,
            bn_epsilon: BN_EPSILON,
            bn_momentum: BN_MOMENTUM,
            schema,
        })
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn dropout_rate(&self) -> f64 {
        self.dropout_rate
    }

    pub fn input_dimension(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn layers(&self) -> &[Dense] {
        &self.dense
    }

    pub fn batch_norms(&self) -> &[BatchNorm] {
        &self.norms
    }

    /// Checks the structural invariants: five dense layers with matching
    /// shapes, a scalar output, positive running variances and finite values.
    pub fn validate(&self) -> Result<()> {
        self.schema.validate()?;
        let dims = &self.layer_dims;
        if dims.len() != HIDDEN_LAYERS + 2 || self.dense.len() != HIDDEN_LAYERS + 1 {
            return Err(Error::Model(format!("expected 5 dense layers, found {}", self.dense.len())));
        }
        if dims[0] != self.schema.dimension() {
            return Err(Error::Model(format!(
                "input dimension {} does not match feature schema dimension {}",
                dims[0],
                self.schema.dimension()
            )));
        }
        if dims[HIDDEN_LAYERS + 1] != 1 {
            return Err(Error::Model("output layer must have width 1".into()));
        }
        for (l, layer) in self.dense.iter().enumerate() {
            if layer.inputs != dims[l]
                || layer.outputs != dims[l + 1]
                || layer.weights.len() != dims[l] * dims[l + 1]
                || layer.biases.len() != dims[l + 1]
            {
                return Err(Error::Model(format!("layer {l} shape does not match layer_dims")));
            }
            if !layer.weights.iter().chain(&layer.biases).all(|v| v.is_finite()) {
                return Err(Error::Model(format!("layer {l} has non-finite parameters")));
            }
        }
        if self.norms.len() != HIDDEN_LAYERS {
            return Err(Error::Model("expected one batch norm per hidden layer".into()));
        }
        for (l, bn) in self.norms.iter().enumerate() {
            let width = dims[l + 1];
            let tensors = [&bn.gamma, &bn.beta, &bn.running_mean, &bn.running_var];
            if tensors.iter().any(|t| t.len() != width) {
                return Err(Error::Model(format!("batch norm {l} has wrong width")));
            }
            if !tensors.iter().all(|t| t.iter().all(|v| v.is_finite())) {
                return Err(Error::Model(format!("batch norm {l} has non-finite values")));
            }
            if bn.running_var.iter().any(|&v| v <= 0.0) {
                return Err(Error::Model(format!("batch norm {l} has non-positive running variance")));
            }
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::Model("dropout rate must be in [0, 1)".into()));
        }
        if !(self.bn_epsilon > 0.0 && self.bn_epsilon.is_finite()) {
            return Err(Error::Model("batch norm epsilon must be positive".into()));
        }
        Ok(())
    }

    fn check_dimension(&self, len: usize) -> Result<()> {
        if len != self.input_dimension() {
            return Err(Error::Model(format!(
                "feature dimension {len} does not match model input dimension {}",
                self.input_dimension()
            )));
        }
        Ok(())
    }

    /// Inference-mode probability for a single feature vector.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.check_dimension(x.len())?;
        let mut current = x.to_vec();
        let mut next = Vec::new();
        for (layer, bn) in self.dense.iter().zip(&self.norms) {
            layer.forward_one(&current, &mut next);
            for (j, z) in next.iter_mut().enumerate() {
                let normalized = (*z - bn.running_mean[j]) / (bn.running_var[j] + self.bn_epsilon).sqrt();
                *z = (bn.gamma[j] * normalized + bn.beta[j]).max(0.0);
            }
            std::mem::swap(&mut current, &mut next);
        }
        self.dense[HIDDEN_LAYERS].forward_one(&current, &mut next);
        Ok(probability(next[0]))
    }

    /// Batch forward pass. Training mode uses batch statistics and dropout
    /// (drawn from `rng`); it does not update the running statistics.
    pub fn forward_batch<R: Rng + ?Sized>(
        &self,
        inputs: &[Vec<f64>],
        mode: Mode,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        match mode {
            Mode::Infer => inputs.iter().map(|x| self.predict(x)).collect(),
            Mode::Train => {
                let x = self.batch_matrix(inputs)?;
                let cache = self.forward_train(&x, Some(rng))?;
                Ok(cache.logits.iter().map(|&s| probability(s)).collect())
            }
        }
    }

    fn batch_matrix(&self, inputs: &[Vec<f64>]) -> Result<Matrix> {
        if inputs.len() < 2 {
            return Err(Error::Model("training-mode batches need at least 2 rows".into()));
        }
        for x in inputs {
            self.check_dimension(x.len())?;
        }
        Ok(Matrix::from_rows(inputs))
    }

    pub(crate) fn forward_train<R: Rng + ?Sized>(
        &self,
        x: &Matrix,
        mut dropout: Option<&mut R>,
    ) -> Result<ForwardCache> {
        self.check_dimension(x.cols)?;
        let keep = 1.0 - self.dropout_rate;
        let mut hidden = Vec::with_capacity(HIDDEN_LAYERS);
        let mut current = x.clone();
        for (layer, bn) in self.dense.iter().zip(&self.norms) {
            let z = layer.forward(&current);
            let (mean, var) = z.column_stats();
            let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + self.bn_epsilon).sqrt()).collect();
            let mut xhat = z;
            let mut normalized = Matrix::zeros(xhat.rows, xhat.cols);
            for b in 0..xhat.rows {
                let xr = xhat.row_mut(b);
                for j in 0..xr.len() {
                    xr[j] = (xr[j] - mean[j]) * inv_std[j];
                }
                let xr = xhat.row(b).to_vec();
                for (j, y) in normalized.row_mut(b).iter_mut().enumerate() {
                    *y = bn.gamma[j] * xr[j] + bn.beta[j];
                }
            }
            let mut activated = normalized.clone();
            activated.data.iter_mut().for_each(|v| *v = v.max(0.0));
            let mut mask = Vec::new();
            if let Some(rng) = dropout.as_deref_mut() {
                if self.dropout_rate > 0.0 {
                    mask = (0..activated.data.len())
                        .map(|_| if rng.gen_bool(keep) { 1.0 / keep } else { 0.0 })
                        .collect();
                    for (v, m) in activated.data.iter_mut().zip(&mask) {
                        *v *= m;
                    }
                }
            }
            hidden.push(HiddenCache {
                input: current,
                xhat,
                inv_std,
                mean,
                var,
                normalized,
                mask,
            });
            current = activated;
        }
        let logits = self.dense[HIDDEN_LAYERS].forward(&current).data;
        Ok(ForwardCache { hidden, last: current, logits })
    }

    /// Batch-norm outputs before gamma/beta (the standardized
    /// pre-activations) of each hidden layer in training mode.
    pub fn standardized_preactivations(&self, inputs: &[Vec<f64>]) -> Result<Vec<Matrix>> {
        let x = self.batch_matrix(inputs)?;
        let cache = self.forward_train::<rand::rngs::ThreadRng>(&x, None)?;
        Ok(cache.hidden.into_iter().map(|h| h.xhat).collect())
    }

    /// Mean binary cross-entropy of a training-mode pass and its gradient
    /// with respect to [`MlpModel::parameters`]. Dropout is applied only
    /// when `dropout` is given.
    pub fn loss_and_gradient<R: Rng + ?Sized>(
        &self,
        inputs: &[Vec<f64>],
        labels: &[f64],
        dropout: Option<&mut R>,
    ) -> Result<(f64, Vec<f64>)> {
        let x = self.batch_matrix(inputs)?;
        let cache = self.forward_train(&x, dropout)?;
        let (loss, grads) = self.backward(&cache, labels);
        Ok((loss, grads.into_iter().flatten().collect()))
    }

    /// Loss and per-tensor gradients, in [`MlpModel::parameters`] order.
    pub(crate) fn backward(&self, cache: &ForwardCache, labels: &[f64]) -> (f64, Vec<Vec<f64>>) {
        let batch = cache.logits.len();
        let n = batch as f64;
        let mut loss = 0.0;
        let mut dlogits = Vec::with_capacity(batch);
        for (&s, &y) in cache.logits.iter().zip(labels) {
            loss += s.max(0.0) - s * y + (-s.abs()).exp().ln_1p();
            dlogits.push((sigmoid(s) - y) / n);
        }
        loss /= n;

        let mut grads: Vec<Vec<f64>> = Vec::with_capacity(2 * (HIDDEN_LAYERS + 1) + 2 * HIDDEN_LAYERS);
        // Collected back to front, reversed at the end.
        let out = &self.dense[HIDDEN_LAYERS];
        let (mut dw, mut db) = (vec![0.0; out.weights.len()], vec![0.0; out.outputs]);
        let mut dact = Matrix::zeros(batch, out.inputs);
        for b in 0..batch {
            let g = dlogits[b];
            db[0] += g;
            let a = cache.last.row(b);
            for i in 0..out.inputs {
                dw[i] += g * a[i];
            }
            for (d, w) in dact.row_mut(b).iter_mut().zip(&out.weights) {
                *d = g * w;
            }
        }
        grads.push(db);
        grads.push(dw);

        for l in (0..HIDDEN_LAYERS).rev() {
            let layer = &self.dense[l];
            let bn = &self.norms[l];
            let h = &cache.hidden[l];
            let width = layer.outputs;
            // Through dropout and ReLU.
            let mut dy = dact;
            for (k, d) in dy.data.iter_mut().enumerate() {
                if !h.mask.is_empty() {
                    *d *= h.mask[k];
                }
                if h.normalized.data[k] <= 0.0 {
                    *d = 0.0;
                }
            }
            let mut dgamma = vec![0.0; width];
            let mut dbeta = vec![0.0; width];
            let mut sum_dxhat = vec![0.0; width];
            let mut sum_dxhat_xhat = vec![0.0; width];
            for b in 0..batch {
                let (dyr, xr) = (dy.row(b), h.xhat.row(b));
                for j in 0..width {
                    dgamma[j] += dyr[j] * xr[j];
                    dbeta[j] += dyr[j];
                    let dxhat = dyr[j] * bn.gamma[j];
                    sum_dxhat[j] += dxhat;
                    sum_dxhat_xhat[j] += dxhat * xr[j];
                }
            }
            let mut dz = Matrix::zeros(batch, width);
            for b in 0..batch {
                let (dyr, xr) = (dy.row(b), h.xhat.row(b));
                let dzr = dz.row_mut(b);
                for j in 0..width {
                    let dxhat = dyr[j] * bn.gamma[j];
                    dzr[j] = h.inv_std[j] / n * (n * dxhat - sum_dxhat[j] - xr[j] * sum_dxhat_xhat[j]);
                }
            }
            let (mut dw, mut db) = (vec![0.0; layer.weights.len()], vec![0.0; width]);
            let mut dprev = Matrix::zeros(batch, layer.inputs);
            for b in 0..batch {
                let a = h.input.row(b);
                let dzr = dz.row(b);
                let dp = dprev.row_mut(b);
                for o in 0..width {
                    let g = dzr[o];
                    if g == 0.0 {
                        continue;
                    }
                    db[o] += g;
                    let wrow = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    let dwrow = &mut dw[o * layer.inputs..(o + 1) * layer.inputs];
                    for i in 0..layer.inputs {
                        dwrow[i] += g * a[i];
                        dp[i] += g * wrow[i];
                    }
                }
            }
            grads.push(dbeta);
            grads.push(dgamma);
            grads.push(db);
            grads.push(dw);
            dact = dprev;
        }
        grads.reverse();
        (loss, grads)
    }

    /// Per-tensor views in canonical order: for each hidden layer
    /// `weights, biases, gamma, beta`, then output `weights, biases`.
    pub(crate) fn tensors_mut(&mut self) -> Vec<&mut Vec<f64>> {
        let mut out = Vec::new();
        let (hidden, last) = self.dense.split_at_mut(HIDDEN_LAYERS);
        for (layer, bn) in hidden.iter_mut().zip(self.norms.iter_mut()) {
            out.push(&mut layer.weights);
            out.push(&mut layer.biases);
            out.push(&mut bn.gamma);
            out.push(&mut bn.beta);
        }
        out.push(&mut last[0].weights);
        out.push(&mut last[0].biases);
        out
    }

    /// Trainable parameters flattened in canonical order.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (layer, bn) in self.dense.iter().zip(&self.norms) {
            out.extend(&layer.weights);
            out.extend(&layer.biases);
            out.extend(&bn.gamma);
            out.extend(&bn.beta);
        }
        out.extend(&self.dense[HIDDEN_LAYERS].weights);
        out.extend(&self.dense[HIDDEN_LAYERS].biases);
        out
    }

    pub fn set_parameters(&mut self, values: &[f64]) -> Result<()> {
        let expected = self.parameters().len();
        if values.len() != expected {
            return Err(Error::Model(format!("expected {expected} parameters, got {}", values.len())));
        }
        let mut offset = 0;
        for tensor in self.tensors_mut() {
            let len = tensor.len();
            tensor.copy_from_slice(&values[offset..offset + len]);
            offset += len;
        }
        Ok(())
    }

    /// Exponential moving average update of the running statistics from a
    /// training-mode pass.
    pub(crate) fn update_running_stats(&mut self, cache: &ForwardCache) {
        let batch = cache.logits.len() as f64;
        let correction = if batch > 1.0 { batch / (batch - 1.0) } else { 1.0 };
        let m = self.bn_momentum;
        for (bn, (mean, var)) in self.norms.iter_mut().zip(cache.batch_stats()) {
            for j in 0..mean.len() {
                bn.running_mean[j] = (1.0 - m) * bn.running_mean[j] + m * mean[j];
                bn.running_var[j] = (1.0 - m) * bn.running_var[j] + m * var[j] * correction;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Sigmoid kept strictly inside (0, 1).
fn probability(logit: f64) -> f64 {
    sigmoid(logit).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
}
