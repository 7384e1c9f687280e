//! Feed-forward classification engine.
//!
//! A network is described by a [`NetworkSpec`] and all of its trainable
//! parameters live in one flat [`WeightVector`], so that weight-space
//! geometry (interpolation, subspace sampling, cosine similarity) is plain
//! vector arithmetic. Layout is layer-major, weights-then-bias, row-major
//! within a layer (each row holds one output unit's incoming weights).
//!
//! Weights are stored as `f32` for checkpoint compactness; all forward,
//! backward, and reduction arithmetic runs in `f64`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;
// Inherent float methods shadow these under std; libm backs them under no_std.
#[allow(unused_imports)]
use num_traits::Float;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::digest::{Digest, DigestBuilder};
use crate::error::{CoreError, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitScheme {
    HeNormal,
    GlorotUniform,
}

/// Architecture of a fully connected classifier.
///
/// `layer_widths` runs input dim, hidden widths, class count; the output
/// layer always feeds a softmax.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    layer_widths: Vec<usize>,
    activation: Activation,
    init_scheme: InitScheme,
}

impl NetworkSpec {
    pub fn new(
        layer_widths: Vec<usize>,
        activation: Activation,
        init_scheme: InitScheme,
    ) -> Result<Self> {
        if layer_widths.len() < 2 {
            return Err(CoreError::invalid("a network needs at least 2 layers"));
        }
        if layer_widths.iter().any(|&w| w == 0) {
            return Err(CoreError::invalid("all layer widths must be >= 1"));
        }
        let classes = *layer_widths.last().unwrap();
        if classes < 2 {
            return Err(CoreError::invalid("output width must be >= 2 classes"));
        }
        Ok(NetworkSpec {
            layer_widths,
            activation,
            init_scheme,
        })
    }

    pub fn layer_widths(&self) -> &[usize] {
        &self.layer_widths
    }

    pub fn input_dim(&self) -> usize {
        self.layer_widths[0]
    }

    pub fn class_count(&self) -> usize {
        *self.layer_widths.last().unwrap()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn init_scheme(&self) -> InitScheme {
        self.init_scheme
    }

    /// Number of dense layers (weight matrices).
    pub fn layer_count(&self) -> usize {
        self.layer_widths.len() - 1
    }

    /// Total trainable parameters: sum over layers of `(in + 1) * out`.
    pub fn param_count(&self) -> usize {
        self.layer_widths
            .windows(2)
            .map(|w| (w[0] + 1) * w[1])
            .sum()
    }

    pub fn digest(&self) -> Digest {
        let widths: Vec<u32> = self.layer_widths.iter().map(|&w| w as u32).collect();
        let mut tags = String::new();
        let _ = write!(tags, "{:?}|{:?}", self.activation, self.init_scheme);
        DigestBuilder::new("network-spec")
            .u32s(&widths)
            .str(&tags)
            .finish()
    }
}

/// All trainable parameters of one network as a flat `f32` vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    values: Vec<f32>,
    spec_digest: Digest,
}

impl WeightVector {
    pub fn from_values(values: Vec<f32>, spec: &NetworkSpec) -> Result<Self> {
        if values.len() != spec.param_count() {
            return Err(CoreError::Shape {
                context: "weight vector length",
                expected: spec.param_count(),
                got: values.len(),
            });
        }
        Ok(WeightVector {
            values,
            spec_digest: spec.digest(),
        })
    }

    pub fn zeros(spec: &NetworkSpec) -> Self {
        WeightVector {
            values: vec![0.0; spec.param_count()],
            spec_digest: spec.digest(),
        }
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f32] {
        &mut self.values
    }

    pub fn spec_digest(&self) -> Digest {
        self.spec_digest
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn check_spec(&self, spec: &NetworkSpec, context: &'static str) -> Result<()> {
        if self.spec_digest != spec.digest() {
            return Err(CoreError::DigestMismatch { context });
        }
        if self.values.len() != spec.param_count() {
            return Err(CoreError::Shape {
                context,
                expected: spec.param_count(),
                got: self.values.len(),
            });
        }
        Ok(())
    }
}

/// Row-stochastic class probabilities for a fixed evaluation set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionMatrix {
    probs: Vec<f32>,
    rows: usize,
    classes: usize,
    example_set_digest: Digest,
}

impl PredictionMatrix {
    /// Validates row-stochasticity (each row sums to 1 within 1e-6, entries
    /// in `[0, 1]`).
    pub fn new(
        probs: Vec<f32>,
        rows: usize,
        classes: usize,
        example_set_digest: Digest,
    ) -> Result<Self> {
        if probs.len() != rows * classes {
            return Err(CoreError::Shape {
                context: "prediction matrix",
                expected: rows * classes,
                got: probs.len(),
            });
        }
        for r in 0..rows {
            let row = &probs[r * classes..(r + 1) * classes];
            let mut sum = 0.0f64;
            for &p in row {
                if !(0.0..=1.0).contains(&p) {
                    return Err(CoreError::invalid("probability outside [0, 1]"));
                }
                sum += f64::from(p);
            }
            if (sum - 1.0).abs() > 1e-6 {
                return Err(CoreError::invalid("prediction row does not sum to 1"));
            }
        }
        Ok(PredictionMatrix {
            probs,
            rows,
            classes,
            example_set_digest,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.probs[i * self.classes..(i + 1) * self.classes]
    }

    pub fn probs(&self) -> &[f32] {
        &self.probs
    }

    pub fn example_set_digest(&self) -> Digest {
        self.example_set_digest
    }
}

/// Borrowed row-major feature matrix plus the digest identifying its
/// content.
#[derive(Debug, Clone, Copy)]
pub struct Batch<'a> {
    data: &'a [f64],
    rows: usize,
    cols: usize,
    digest: Digest,
}

impl<'a> Batch<'a> {
    /// Wraps features, hashing the content to form the example-set digest.
    pub fn new(data: &'a [f64], rows: usize, cols: usize) -> Result<Self> {
        let digest = {
            let mut builder = DigestBuilder::new("batch").u64(rows as u64).u64(cols as u64);
            let mut buf = Vec::with_capacity(data.len() * 8);
            for v in data {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            builder = builder.bytes(&buf);
            builder.finish()
        };
        Self::with_digest(data, rows, cols, digest)
    }

    /// Wraps features under a caller-supplied digest (e.g. a dataset split
    /// digest computed once).
    pub fn with_digest(data: &'a [f64], rows: usize, cols: usize, digest: Digest) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(CoreError::Shape {
                context: "feature batch",
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Batch {
            data,
            rows,
            cols,
            digest,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn digest(&self) -> Digest {
        self.digest
    }
}

/// Weights and bias of one dense layer, row-major `(out, in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub weights: Vec<f32>,
    pub bias: Vec<f32>,
}

/// Splits a flat weight vector into per-layer parameters.
pub fn unflatten(spec: &NetworkSpec, w: &WeightVector) -> Result<Vec<LayerParams>> {
    w.check_spec(spec, "unflatten")?;
    let mut layers = Vec::with_capacity(spec.layer_count());
    let mut offset = 0;
    for pair in spec.layer_widths.windows(2) {
        let (w_in, w_out) = (pair[0], pair[1]);
        let weights = w.values[offset..offset + w_in * w_out].to_vec();
        offset += w_in * w_out;
        let bias = w.values[offset..offset + w_out].to_vec();
        offset += w_out;
        layers.push(LayerParams { weights, bias });
    }
    Ok(layers)
}

/// Packs per-layer parameters back into a flat weight vector.
pub fn flatten(spec: &NetworkSpec, layers: &[LayerParams]) -> Result<WeightVector> {
    if layers.len() != spec.layer_count() {
        return Err(CoreError::Shape {
            context: "flatten layer count",
            expected: spec.layer_count(),
            got: layers.len(),
        });
    }
    let mut values = Vec::with_capacity(spec.param_count());
    for (layer, pair) in layers.iter().zip(spec.layer_widths.windows(2)) {
        let (w_in, w_out) = (pair[0], pair[1]);
        if layer.weights.len() != w_in * w_out || layer.bias.len() != w_out {
            return Err(CoreError::Shape {
                context: "flatten layer size",
                expected: w_in * w_out + w_out,
                got: layer.weights.len() + layer.bias.len(),
            });
        }
        values.extend_from_slice(&layer.weights);
        values.extend_from_slice(&layer.bias);
    }
    WeightVector::from_values(values, spec)
}

/// Draws initial weights from the spec's init scheme; biases start at zero.
pub fn init_weights(spec: &NetworkSpec, rng: &mut impl RngCore) -> WeightVector {
    let mut values = Vec::with_capacity(spec.param_count());
    for pair in spec.layer_widths.windows(2) {
        let (w_in, w_out) = (pair[0], pair[1]);
        match spec.init_scheme {
            InitScheme::HeNormal => {
                let std = (2.0 / w_in as f64).sqrt();
                for _ in 0..w_in * w_out {
                    values.push((rng::standard_normal(rng) * std) as f32);
                }
            }
            InitScheme::GlorotUniform => {
                let limit = (6.0 / (w_in + w_out) as f64).sqrt();
                for _ in 0..w_in * w_out {
                    values.push(rng::uniform_in(rng, -limit, limit) as f32);
                }
            }
        }
        values.extend(core::iter::repeat(0.0f32).take(w_out));
    }
    WeightVector {
        values,
        spec_digest: spec.digest(),
    }
}

/// Per-layer f64 views used by the forward/backward passes.
struct Dense64 {
    w_in: usize,
    w_out: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

fn upcast(spec: &NetworkSpec, w: &WeightVector) -> Vec<Dense64> {
    let mut layers = Vec::with_capacity(spec.layer_count());
    let mut offset = 0;
    for pair in spec.layer_widths.windows(2) {
        let (w_in, w_out) = (pair[0], pair[1]);
        let weights = w.values[offset..offset + w_in * w_out]
            .iter()
            .map(|&v| f64::from(v))
            .collect();
        offset += w_in * w_out;
        let bias = w.values[offset..offset + w_out]
            .iter()
            .map(|&v| f64::from(v))
            .collect();
        offset += w_out;
        layers.push(Dense64 {
            w_in,
            w_out,
            weights,
            bias,
        });
    }
    layers
}

fn apply_activation(act: Activation, z: &mut [f64]) {
    match act {
        Activation::Relu => {
            for v in z.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        Activation::Tanh => {
            for v in z.iter_mut() {
                *v = v.tanh();
            }
        }
    }
}

fn activation_grad(act: Activation, post: f64) -> f64 {
    match act {
        // relu'(z) in terms of the post-activation value; 0 at the kink.
        Activation::Relu => {
            if post > 0.0 {
                1.0
            } else {
                0.0
            }
        }
        Activation::Tanh => 1.0 - post * post,
    }
}

fn check_finite(layer: usize, values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::NonFinite { layer });
    }
    Ok(())
}

/// Runs one example through all layers, returning the per-layer
/// post-activation values (index 0 is the input itself; the last entry holds
/// softmax probabilities).
fn forward_example(
    spec: &NetworkSpec,
    layers: &[Dense64],
    x: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let mut acts: Vec<Vec<f64>> = Vec::with_capacity(layers.len() + 1);
    acts.push(x.to_vec());
    let last = layers.len() - 1;
    for (l, layer) in layers.iter().enumerate() {
        let prev = &acts[l];
        let mut z = vec![0.0f64; layer.w_out];
        for o in 0..layer.w_out {
            let row = &layer.weights[o * layer.w_in..(o + 1) * layer.w_in];
            let mut acc = layer.bias[o];
            for (wv, xv) in row.iter().zip(prev.iter()) {
                acc += wv * xv;
            }
            z[o] = acc;
        }
        if l == last {
            softmax_in_place(&mut z);
        } else {
            apply_activation(spec.activation, &mut z);
        }
        check_finite(l, &z)?;
        acts.push(z);
    }
    Ok(acts)
}

/// Numerically stable softmax (max subtraction).
fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

/// Softmax class probabilities for every row of `batch`.
pub fn forward(spec: &NetworkSpec, w: &WeightVector, batch: &Batch) -> Result<PredictionMatrix> {
    w.check_spec(spec, "forward")?;
    if batch.cols != spec.input_dim() {
        return Err(CoreError::Shape {
            context: "forward input dim",
            expected: spec.input_dim(),
            got: batch.cols,
        });
    }
    let layers = upcast(spec, w);
    let classes = spec.class_count();
    let mut probs = Vec::with_capacity(batch.rows * classes);
    for i in 0..batch.rows {
        let acts = forward_example(spec, &layers, batch.row(i))?;
        probs.extend(acts.last().unwrap().iter().map(|&p| p as f32));
    }
    PredictionMatrix::new(probs, batch.rows, classes, batch.digest)
}

/// Mean cross-entropy plus `l2 * ||w||^2 / 2`, and its exact gradient.
pub fn loss_and_grad(
    spec: &NetworkSpec,
    w: &WeightVector,
    batch: &Batch,
    labels: &[u32],
    l2: f64,
) -> Result<(f64, WeightVector)> {
    w.check_spec(spec, "loss_and_grad")?;
    if batch.cols != spec.input_dim() {
        return Err(CoreError::Shape {
            context: "loss input dim",
            expected: spec.input_dim(),
            got: batch.cols,
        });
    }
    if batch.rows == 0 {
        return Err(CoreError::invalid("loss over an empty batch"));
    }
    if labels.len() != batch.rows {
        return Err(CoreError::Shape {
            context: "label count",
            expected: batch.rows,
            got: labels.len(),
        });
    }
    let classes = spec.class_count();
    if let Some(&bad) = labels.iter().find(|&&l| l as usize >= classes) {
        return Err(CoreError::invalid(alloc::format!(
            "label {bad} out of range for {classes} classes"
        )));
    }
    if l2 < 0.0 {
        return Err(CoreError::invalid("l2 strength must be non-negative"));
    }

    let layers = upcast(spec, w);
    let mut grads: Vec<(Vec<f64>, Vec<f64>)> = layers
        .iter()
        .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.bias.len()]))
        .collect();
    let mut ce_total = 0.0f64;

    for i in 0..batch.rows {
        let acts = forward_example(spec, &layers, batch.row(i))?;
        let probs = acts.last().unwrap();
        let label = labels[i] as usize;
        // Clamp keeps the loss finite when a probability underflows to 0.
        ce_total -= probs[label].max(1e-300).ln();

        // delta of the layer currently being propagated (dL/dz).
        let mut delta: Vec<f64> = probs.clone();
        delta[label] -= 1.0;
        for l in (0..layers.len()).rev() {
            let prev = &acts[l];
            let (gw, gb) = &mut grads[l];
            let layer = &layers[l];
            for o in 0..layer.w_out {
                let d = delta[o];
                gb[o] += d;
                let grow = &mut gw[o * layer.w_in..(o + 1) * layer.w_in];
                for (g, xv) in grow.iter_mut().zip(prev.iter()) {
                    *g += d * xv;
                }
            }
            if l > 0 {
                let mut prev_delta = vec![0.0f64; layer.w_in];
                for o in 0..layer.w_out {
                    let d = delta[o];
                    let row = &layer.weights[o * layer.w_in..(o + 1) * layer.w_in];
                    for (pd, wv) in prev_delta.iter_mut().zip(row.iter()) {
                        *pd += d * wv;
                    }
                }
                for (pd, &post) in prev_delta.iter_mut().zip(acts[l].iter()) {
                    *pd *= activation_grad(spec.activation, post);
                }
                delta = prev_delta;
            }
        }
    }

    let n = batch.rows as f64;
    let mut grad_values = Vec::with_capacity(w.len());
    for (gw, gb) in &grads {
        grad_values.extend(gw.iter().map(|g| g / n));
        grad_values.extend(gb.iter().map(|g| g / n));
    }
    // L2 term over the full flat vector (weights and biases).
    let mut sq_norm = 0.0f64;
    for (gv, &wv) in grad_values.iter_mut().zip(w.values.iter()) {
        let wv = f64::from(wv);
        sq_norm += wv * wv;
        *gv += l2 * wv;
    }
    let loss = ce_total / n + 0.5 * l2 * sq_norm;
    if !loss.is_finite() {
        return Err(CoreError::NonFinite {
            layer: spec.layer_count() - 1,
        });
    }
    let grad = WeightVector {
        values: grad_values.iter().map(|&g| g as f32).collect(),
        spec_digest: w.spec_digest,
    };
    Ok((loss, grad))
}

/// Per-row argmax labels; ties break toward the lowest class index.
pub fn predict_labels(pm: &PredictionMatrix) -> Vec<u32> {
    (0..pm.rows())
        .map(|i| {
            let row = pm.row(i);
            let mut best = 0usize;
            for (c, &p) in row.iter().enumerate().skip(1) {
                if p > row[best] {
                    best = c;
                }
            }
            best as u32
        })
        .collect()
}
