//! A compact differentiable convolutional classifier.
//!
//! Layers operate on channel-major (`C × H × W`) activations. Images are
//! converted from their interleaved layout on entry and input gradients are
//! converted back, so callers only ever see [`Image`]-shaped data.
//!
//! The backward pass follows fixed subgradient conventions: relu has slope 0
//! at 0, and a 2×2 max-pool routes its gradient to the first maximal element
//! in scan order.

mod train;
mod weights;

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::image::{check_shape, Image, Shape};
use crate::{Error, Result};

pub use train::{accuracy, train, TrainConfig, Trained};
pub use weights::{decode_weights, encode_weights, load_weights, save_weights, WEIGHTS_MAGIC};

/// Lower clamp on the probability inside the cross-entropy.
pub const PROB_FLOOR: f64 = 1e-12;

/// Activation dimensions between layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl Dims {
    pub fn len(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    /// Stride-1 convolution with zero padding that preserves spatial size.
    /// Weights are laid out `[out][in][ky][kx]`.
    Conv {
        kernel: usize,
        in_channels: usize,
        out_channels: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
    },
    Relu,
    /// 2×2 max-pool with stride 2; odd trailing rows/columns are dropped.
    MaxPool,
    Flatten,
    /// Fully connected layer, weights laid out `[out][in]`.
    Dense {
        inputs: usize,
        outputs: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
    },
}

impl Layer {
    fn output_dims(&self, d: Dims) -> Result<Dims> {
        match self {
            Layer::Conv {
                kernel,
                in_channels,
                out_channels,
                ..
            } => {
                if d.channels != *in_channels {
                    return Err(Error::InvalidParameter(format!(
                        "conv expects {in_channels} input channels, got {}",
                        d.channels
                    )));
                }
                if kernel % 2 == 0 {
                    return Err(Error::InvalidParameter(format!(
                        "conv kernel must be odd, got {kernel}"
                    )));
                }
                Ok(Dims {
                    channels: *out_channels,
                    ..d
                })
            }
            Layer::Relu => Ok(d),
            Layer::MaxPool => {
                if d.height < 2 || d.width < 2 {
                    return Err(Error::InvalidParameter(format!(
                        "max-pool needs at least 2x2 input, got {}x{}",
                        d.width, d.height
                    )));
                }
                Ok(Dims {
                    channels: d.channels,
                    height: d.height / 2,
                    width: d.width / 2,
                })
            }
            Layer::Flatten => Ok(Dims {
                channels: d.len(),
                height: 1,
                width: 1,
            }),
            Layer::Dense {
                inputs, outputs, ..
            } => {
                if d.len() != *inputs {
                    return Err(Error::InvalidParameter(format!(
                        "dense expects {inputs} inputs, got {}",
                        d.len()
                    )));
                }
                Ok(Dims {
                    channels: *outputs,
                    height: 1,
                    width: 1,
                })
            }
        }
    }

    fn params(&self) -> Option<(&[f64], &[f64])> {
        match self {
            Layer::Conv { weights, bias, .. } | Layer::Dense { weights, bias, .. } => {
                Some((weights, bias))
            }
            _ => None,
        }
    }

    fn params_mut(&mut self) -> Option<(&mut Vec<f64>, &mut Vec<f64>)> {
        match self {
            Layer::Conv { weights, bias, .. } | Layer::Dense { weights, bias, .. } => {
                Some((weights, bias))
            }
            _ => None,
        }
    }
}

/// A layered classifier over images of a fixed [`Shape`].
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    input: Shape,
    layers: Vec<Layer>,
    /// `dims[i]` is the input of `layers[i]`; the last entry is the output.
    dims: Vec<Dims>,
}

impl Model {
    /// Validates that layer shapes chain, the output is a class vector and
    /// every weight is finite.
    pub fn new(input: Shape, layers: Vec<Layer>) -> Result<Self> {
        if input.is_empty() {
            return Err(Error::InvalidParameter("empty input shape".into()));
        }
        let mut dims = vec![Dims {
            channels: input.channels,
            height: input.height,
            width: input.width,
        }];
        for layer in &layers {
            if let Layer::Conv {
                kernel,
                in_channels,
                out_channels,
                weights,
                bias,
            } = layer
            {
                if weights.len() != out_channels * in_channels * kernel * kernel
                    || bias.len() != *out_channels
                {
                    return Err(Error::InvalidParameter("conv parameter count mismatch".into()));
                }
            }
            if let Layer::Dense {
                inputs,
                outputs,
                weights,
                bias,
            } = layer
            {
                if weights.len() != inputs * outputs || bias.len() != *outputs {
                    return Err(Error::InvalidParameter("dense parameter count mismatch".into()));
                }
            }
            if let Some((w, b)) = layer.params() {
                if w.iter().chain(b).any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter("non-finite weight".into()));
                }
            }
            let next = layer.output_dims(*dims.last().unwrap())?;
            dims.push(next);
        }
        let out = dims.last().unwrap();
        if out.height != 1 || out.width != 1 || out.channels < 2 {
            return Err(Error::InvalidParameter(format!(
                "final layer must produce a vector of at least 2 class scores, got {}x{}x{}",
                out.channels, out.height, out.width
            )));
        }
        Ok(Self {
            input,
            layers,
            dims,
        })
    }

    /// The stand-in architecture used throughout the crate:
    /// conv 3×3×16 → relu → max-pool → conv 3×3×32 → relu → max-pool → dense.
    pub fn reference(input: Shape, classes: usize, seed: u64) -> Result<Self> {
        ModelBuilder::new(input)
            .conv(3, 16)
            .relu()
            .max_pool()
            .conv(3, 32)
            .relu()
            .max_pool()
            .flatten()
            .dense(classes)
            .build(seed)
    }

    pub fn input_shape(&self) -> Shape {
        self.input
    }

    pub fn classes(&self) -> usize {
        self.dims.last().unwrap().channels
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .filter_map(Layer::params)
            .map(|(w, b)| w.len() + b.len())
            .sum()
    }

    pub fn forward(&self, x: &Image) -> Result<Prediction> {
        check_shape(self.input, x.shape())?;
        Ok(self.trace(x).prediction())
    }

    /// Cross-entropy `-ln max(p_y, 1e-12)`.
    pub fn loss(&self, x: &Image, label: usize) -> Result<f64> {
        self.check_label(label)?;
        Ok(self.forward(x)?.cross_entropy(label))
    }

    /// Gradient of the cross-entropy with respect to every input value.
    ///
    /// The derivative is taken of `-ln p_y` itself: the probability clamp only
    /// bounds the reported loss, so attacks starting from vanishing target
    /// probabilities still receive a signal.
    pub fn input_gradient(&self, x: &Image, label: usize) -> Result<InputGradient> {
        check_shape(self.input, x.shape())?;
        self.check_label(label)?;
        let trace = self.trace(x);
        let grad = self.backward(&trace, &trace.logit_gradient(label), None);
        Ok(InputGradient {
            shape: self.input,
            data: self.interleave_channels(&grad),
        })
    }

    /// Which relus are active and which element each max-pool window selected.
    /// Two inputs with equal patterns lie in the same affine piece of the
    /// network, which is what finite-difference gradient checks need to know.
    pub fn activation_pattern(&self, x: &Image) -> Result<ActivationPattern> {
        check_shape(self.input, x.shape())?;
        let trace = self.trace(x);
        let mut relu = Vec::new();
        let mut pool = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            match layer {
                Layer::Relu => relu.extend(trace.activations[i].iter().map(|&z| z > 0.0)),
                Layer::MaxPool => pool.extend(trace.pool_argmax[i].iter().map(|&k| k as u32)),
                _ => {}
            }
        }
        Ok(ActivationPattern { relu, pool })
    }

    fn check_label(&self, label: usize) -> Result<()> {
        if label >= self.classes() {
            return Err(Error::LabelOutOfRange {
                label,
                classes: self.classes(),
            });
        }
        Ok(())
    }

    fn to_channel_major(&self, x: &Image) -> Vec<f64> {
        let Shape {
            width,
            height,
            channels,
        } = self.input;
        if channels == 1 {
            return x.data().to_vec();
        }
        let plane = width * height;
        let mut out = vec![0.0; x.data().len()];
        for (p, px) in x.data().chunks_exact(channels).enumerate() {
            for (c, &v) in px.iter().enumerate() {
                out[c * plane + p] = v;
            }
        }
        out
    }

    fn interleave_channels(&self, v: &[f64]) -> Vec<f64> {
        let Shape {
            width,
            height,
            channels,
        } = self.input;
        if channels == 1 {
            return v.to_vec();
        }
        let plane = width * height;
        let mut out = vec![0.0; v.len()];
        for (p, px) in out.chunks_exact_mut(channels).enumerate() {
            for (c, slot) in px.iter_mut().enumerate() {
                *slot = v[c * plane + p];
            }
        }
        out
    }

    /// Forward pass keeping every intermediate activation. Callers check the shape.
    pub(crate) fn trace(&self, x: &Image) -> Trace {
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        let mut pool_argmax = vec![Vec::new(); self.layers.len()];
        activations.push(self.to_channel_major(x));
        for (i, layer) in self.layers.iter().enumerate() {
            let input = &activations[i];
            let d = self.dims[i];
            let out = match layer {
                Layer::Conv {
                    kernel,
                    in_channels,
                    out_channels,
                    weights,
                    bias,
                } => conv_forward(input, d, *kernel, *in_channels, *out_channels, weights, bias),
                Layer::Relu => input.iter().map(|&z| if z > 0.0 { z } else { 0.0 }).collect(),
                Layer::MaxPool => {
                    let (out, arg) = pool_forward(input, d);
                    pool_argmax[i] = arg;
                    out
                }
                Layer::Flatten => input.clone(),
                Layer::Dense {
                    inputs,
                    outputs,
                    weights,
                    bias,
                } => dense_forward(input, *inputs, *outputs, weights, bias),
            };
            activations.push(out);
        }
        Trace {
            activations,
            pool_argmax,
        }
    }

    /// Propagates `dlogits` back to the (channel-major) input. When parameter
    /// gradients are requested they are accumulated instead, and the input
    /// gradient is not computed (an empty vector is returned).
    pub(crate) fn backward(
        &self,
        trace: &Trace,
        dlogits: &[f64],
        mut param_grads: Option<&mut Gradients>,
    ) -> Vec<f64> {
        let need_input = param_grads.is_none();
        let mut grad = dlogits.to_vec();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &trace.activations[i];
            let d = self.dims[i];
            grad = match layer {
                Layer::Conv {
                    kernel,
                    in_channels,
                    out_channels,
                    weights,
                    ..
                } => {
                    if let Some(g) = param_grads.as_deref_mut() {
                        let (gw, gb) = g.layer_mut(i);
                        conv_param_grad(input, &grad, d, *kernel, *in_channels, *out_channels, gw, gb);
                    }
                    if i == 0 && !need_input {
                        return Vec::new();
                    }
                    conv_input_grad(&grad, d, *kernel, *in_channels, *out_channels, weights)
                }
                Layer::Relu => grad
                    .iter()
                    .zip(input)
                    .map(|(&g, &z)| if z > 0.0 { g } else { 0.0 })
                    .collect(),
                Layer::MaxPool => {
                    let mut out = vec![0.0; d.len()];
                    for (&src, &g) in trace.pool_argmax[i].iter().zip(&grad) {
                        out[src] += g;
                    }
                    out
                }
                Layer::Flatten => grad,
                Layer::Dense {
                    inputs,
                    outputs,
                    weights,
                    ..
                } => {
                    if let Some(g) = param_grads.as_deref_mut() {
                        let (gw, gb) = g.layer_mut(i);
                        for o in 0..*outputs {
                            let go = grad[o];
                            gb[o] += go;
                            for (w, &a) in gw[o * inputs..(o + 1) * inputs].iter_mut().zip(input) {
                                *w += go * a;
                            }
                        }
                    }
                    let mut out = vec![0.0; *inputs];
                    for o in 0..*outputs {
                        let go = grad[o];
                        for (slot, &w) in out.iter_mut().zip(&weights[o * inputs..(o + 1) * inputs]) {
                            *slot += go * w;
                        }
                    }
                    out
                }
            };
        }
        grad
    }

    pub(crate) fn input_gradient_from_trace(&self, trace: &Trace, label: usize) -> Vec<f64> {
        let grad = self.backward(trace, &trace.logit_gradient(label), None);
        self.interleave_channels(&grad)
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }
}

pub(crate) struct Trace {
    activations: Vec<Vec<f64>>,
    pool_argmax: Vec<Vec<usize>>,
}

impl Trace {
    pub(crate) fn logits(&self) -> &[f64] {
        self.activations.last().unwrap()
    }

    pub(crate) fn prediction(&self) -> Prediction {
        Prediction::from_logits(self.logits().to_vec())
    }

    /// `softmax(z) - onehot(label)`, the gradient of `-ln p_label` in logit space.
    fn logit_gradient(&self, label: usize) -> Vec<f64> {
        let mut g = softmax(self.logits());
        g[label] -= 1.0;
        g
    }
}

/// Per-layer parameter gradients with the same layout as the model's weights.
#[derive(Debug, Clone)]
pub(crate) struct Gradients {
    layers: Vec<Option<(Vec<f64>, Vec<f64>)>>,
}

impl Gradients {
    pub(crate) fn zeros_like(model: &Model) -> Self {
        Self {
            layers: model
                .layers
                .iter()
                .map(|l| l.params().map(|(w, b)| (vec![0.0; w.len()], vec![0.0; b.len()])))
                .collect(),
        }
    }

    fn layer_mut(&mut self, i: usize) -> (&mut [f64], &mut [f64]) {
        let (w, b) = self.layers[i].as_mut().expect("parametrized layer");
        (w, b)
    }

    pub(crate) fn clear(&mut self) {
        for (w, b) in self.layers.iter_mut().flatten() {
            w.fill(0.0);
            b.fill(0.0);
        }
    }

    pub(crate) fn apply(&self, model: &mut Model, scale: f64) {
        for (layer, g) in model.layers_mut().iter_mut().zip(&self.layers) {
            if let (Some((w, b)), Some((gw, gb))) = (layer.params_mut(), g) {
                for (p, d) in w.iter_mut().zip(gw) {
                    *p -= scale * d;
                }
                for (p, d) in b.iter_mut().zip(gb) {
                    *p -= scale * d;
                }
            }
        }
    }
}

fn conv_forward(
    input: &[f64],
    d: Dims,
    kernel: usize,
    in_c: usize,
    out_c: usize,
    weights: &[f64],
    bias: &[f64],
) -> Vec<f64> {
    let (h, w) = (d.height, d.width);
    let plane = h * w;
    let pad = kernel / 2;
    let mut out = vec![0.0; out_c * plane];
    for o in 0..out_c {
        let dst = &mut out[o * plane..(o + 1) * plane];
        dst.fill(bias[o]);
        for i in 0..in_c {
            let src = &input[i * plane..(i + 1) * plane];
            for ky in 0..kernel {
                for kx in 0..kernel {
                    let wv = weights[((o * in_c + i) * kernel + ky) * kernel + kx];
                    let (y0, y1) = valid_range(h, ky, pad);
                    let (x0, x1) = valid_range(w, kx, pad);
                    for y in y0..y1 {
                        let sy = y + ky - pad;
                        let drow = &mut dst[y * w + x0..y * w + x1];
                        let srow = &src[sy * w + x0 + kx - pad..sy * w + x1 + kx - pad];
                        for (a, &b) in drow.iter_mut().zip(srow) {
                            *a += wv * b;
                        }
                    }
                }
            }
        }
    }
    out
}

fn conv_input_grad(
    dout: &[f64],
    d: Dims,
    kernel: usize,
    in_c: usize,
    out_c: usize,
    weights: &[f64],
) -> Vec<f64> {
    let (h, w) = (d.height, d.width);
    let plane = h * w;
    let pad = kernel / 2;
    let mut din = vec![0.0; in_c * plane];
    for o in 0..out_c {
        let g = &dout[o * plane..(o + 1) * plane];
        for i in 0..in_c {
            let dst = &mut din[i * plane..(i + 1) * plane];
            for ky in 0..kernel {
                for kx in 0..kernel {
                    let wv = weights[((o * in_c + i) * kernel + ky) * kernel + kx];
                    let (y0, y1) = valid_range(h, ky, pad);
                    let (x0, x1) = valid_range(w, kx, pad);
                    for y in y0..y1 {
                        let sy = y + ky - pad;
                        let grow = &g[y * w + x0..y * w + x1];
                        let drow = &mut dst[sy * w + x0 + kx - pad..sy * w + x1 + kx - pad];
                        for (a, &b) in drow.iter_mut().zip(grow) {
                            *a += wv * b;
                        }
                    }
                }
            }
        }
    }
    din
}

#[allow(clippy::too_many_arguments)]
fn conv_param_grad(
    input: &[f64],
    dout: &[f64],
    d: Dims,
    kernel: usize,
    in_c: usize,
    out_c: usize,
    gw: &mut [f64],
    gb: &mut [f64],
) {
    let (h, w) = (d.height, d.width);
    let plane = h * w;
    let pad = kernel / 2;
    for o in 0..out_c {
        let g = &dout[o * plane..(o + 1) * plane];
        gb[o] += g.iter().sum::<f64>();
        for i in 0..in_c {
            let src = &input[i * plane..(i + 1) * plane];
            for ky in 0..kernel {
                for kx in 0..kernel {
                    let (y0, y1) = valid_range(h, ky, pad);
                    let (x0, x1) = valid_range(w, kx, pad);
                    let mut acc = 0.0;
                    for y in y0..y1 {
                        let sy = y + ky - pad;
                        let grow = &g[y * w + x0..y * w + x1];
                        let srow = &src[sy * w + x0 + kx - pad..sy * w + x1 + kx - pad];
                        acc += grow.iter().zip(srow).map(|(a, b)| a * b).sum::<f64>();
                    }
                    gw[((o * in_c + i) * kernel + ky) * kernel + kx] += acc;
                }
            }
        }
    }
}

/// Output coordinates whose kernel tap `k` reads inside `[0, n)`.
fn valid_range(n: usize, k: usize, pad: usize) -> (usize, usize) {
    let lo = pad.saturating_sub(k);
    let hi = (n + pad).saturating_sub(k).min(n);
    (lo, hi.max(lo))
}

fn pool_forward(input: &[f64], d: Dims) -> (Vec<f64>, Vec<usize>) {
    let (oh, ow) = (d.height / 2, d.width / 2);
    let plane = d.height * d.width;
    let mut out = Vec::with_capacity(d.channels * oh * ow);
    let mut arg = Vec::with_capacity(d.channels * oh * ow);
    for c in 0..d.channels {
        for y in 0..oh {
            for x in 0..ow {
                let mut best = c * plane + 2 * y * d.width + 2 * x;
                for (dy, dx) in [(0, 1), (1, 0), (1, 1)] {
                    let k = c * plane + (2 * y + dy) * d.width + 2 * x + dx;
                    if input[k] > input[best] {
                        best = k;
                    }
                }
                out.push(input[best]);
                arg.push(best);
            }
        }
    }
    (out, arg)
}

fn dense_forward(input: &[f64], inputs: usize, outputs: usize, w: &[f64], b: &[f64]) -> Vec<f64> {
    (0..outputs)
        .map(|o| {
            b[o] + w[o * inputs..(o + 1) * inputs]
                .iter()
                .zip(input)
                .map(|(a, x)| a * x)
                .sum::<f64>()
        })
        .collect()
}

/// Softmax with max-subtraction.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / sum).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub logits: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// Index of the largest probability, lowest index on ties.
    pub label: usize,
    /// Probability at `label`.
    pub certainty: f64,
}

impl Prediction {
    pub fn from_logits(logits: Vec<f64>) -> Self {
        let probabilities = softmax(&logits);
        let mut label = 0;
        for (k, &p) in probabilities.iter().enumerate() {
            if p > probabilities[label] {
                label = k;
            }
        }
        Self {
            certainty: probabilities[label],
            label,
            probabilities,
            logits,
        }
    }

    pub fn probability(&self, label: usize) -> f64 {
        self.probabilities[label]
    }

    /// `-ln max(p_label, 1e-12)`, evaluated through log-sum-exp so that tiny
    /// probabilities do not underflow before the clamp.
    pub fn cross_entropy(&self, label: usize) -> f64 {
        let max = self.logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + self.logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
        (lse - self.logits[label]).min(-PROB_FLOOR.ln())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputGradient {
    pub shape: Shape,
    /// Interleaved like [`Image::data`].
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivationPattern {
    relu: Vec<bool>,
    pool: Vec<u32>,
}

/// Builds a [`Model`] with He-uniform weights and zero biases.
#[derive(Debug, Clone)]
pub struct ModelBuilder {
    input: Shape,
    specs: Vec<LayerSpec>,
}

#[derive(Debug, Clone, Copy)]
enum LayerSpec {
    Conv { kernel: usize, out: usize },
    Relu,
    MaxPool,
    Flatten,
    Dense { out: usize },
}

impl ModelBuilder {
    pub fn new(input: Shape) -> Self {
        Self {
            input,
            specs: Vec::new(),
        }
    }

    pub fn conv(mut self, kernel: usize, out_channels: usize) -> Self {
        self.specs.push(LayerSpec::Conv {
            kernel,
            out: out_channels,
        });
        self
    }

    pub fn relu(mut self) -> Self {
        self.specs.push(LayerSpec::Relu);
        self
    }

    pub fn max_pool(mut self) -> Self {
        self.specs.push(LayerSpec::MaxPool);
        self
    }

    pub fn flatten(mut self) -> Self {
        self.specs.push(LayerSpec::Flatten);
        self
    }

    pub fn dense(mut self, outputs: usize) -> Self {
        self.specs.push(LayerSpec::Dense { out: outputs });
        self
    }

    pub fn build(self, seed: u64) -> Result<Model> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut d = Dims {
            channels: self.input.channels,
            height: self.input.height,
            width: self.input.width,
        };
        let mut layers = Vec::with_capacity(self.specs.len());
        for spec in self.specs {
            let layer = match spec {
                LayerSpec::Conv { kernel, out } => {
                    let fan_in = d.channels * kernel * kernel;
                    Layer::Conv {
                        kernel,
                        in_channels: d.channels,
                        out_channels: out,
                        weights: he_uniform(&mut rng, fan_in, out * fan_in),
                        bias: vec![0.0; out],
                    }
                }
                LayerSpec::Relu => Layer::Relu,
                LayerSpec::MaxPool => Layer::MaxPool,
                LayerSpec::Flatten => Layer::Flatten,
                LayerSpec::Dense { out } => Layer::Dense {
                    inputs: d.len(),
                    outputs: out,
                    weights: he_uniform(&mut rng, d.len(), out * d.len()),
                    bias: vec![0.0; out],
                },
            };
            d = layer.output_dims(d)?;
            layers.push(layer);
        }
        Model::new(self.input, layers)
    }
}

fn he_uniform(rng: &mut ChaCha8Rng, fan_in: usize, n: usize) -> Vec<f64> {
    let bound = (6.0 / fan_in as f64).sqrt();
    (0..n).map(|_| rng.random_range(-bound..bound)).collect()
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&weights::architecture_string(self))
    }
}
