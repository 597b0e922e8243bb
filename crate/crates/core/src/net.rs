//! Dense feed-forward networks.
//!
//! A layer computes `f(W y + b)` componentwise. [`backward`] returns the exact
//! gradient of one sample's loss with respect to every weight and bias, and
//! [`grad_check`] compares it against central finite differences.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numkit::{Matrix, RandomStream};

/// Lower clamp applied to predicted probabilities under [`Loss::Bce`].
pub const BCE_CLAMP: f64 = 1e-12;
/// Central-difference step used by [`grad_check`].
pub const GRAD_CHECK_STEP: f64 = 1e-5;
/// Relu pre-activations closer than this to zero are treated as sitting on the kink.
pub const RELU_KINK_MARGIN: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Activation {
    Identity,
    Sigmoid,
    Tanh,
    /// Subgradient at zero is taken as `0`.
    Relu,
}

impl Activation {
    pub const ALL: [Activation; 4] = [
        Activation::Identity,
        Activation::Sigmoid,
        Activation::Tanh,
        Activation::Relu,
    ];

    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Sigmoid => sigmoid(z),
            Activation::Tanh => libm::tanh(z),
            Activation::Relu => {
                if z > 0.0 {
                    z
                } else {
                    0.0
                }
            }
        }
    }

    /// `f'(z)` evaluated at the pre-activation.
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Sigmoid => {
                let s = sigmoid(z);
                s * (1.0 - s)
            }
            Activation::Tanh => {
                let t = libm::tanh(z);
                1.0 - t * t
            }
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Loss {
    /// Mean over output components of `(pred - target)²`; no ½ factor.
    Mse,
    /// Binary cross-entropy, predictions clamped to `[1e-12, 1 - 1e-12]`.
    Bce,
}

impl Loss {
    pub fn value(self, pred: &[f64], target: &[f64]) -> Result<f64> {
        if pred.len() != target.len() {
            return Err(Error::dims("loss", target.len(), pred.len()));
        }
        if pred.is_empty() {
            return Ok(0.0);
        }
        let n = pred.len() as f64;
        let total: f64 = match self {
            Loss::Mse => pred
                .iter()
                .zip(target)
                .map(|(p, t)| (p - t) * (p - t))
                .sum(),
            Loss::Bce => pred
                .iter()
                .zip(target)
                .map(|(&p, &t)| {
                    let q = p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
                    -(t * libm::log(q) + (1.0 - t) * libm::log(1.0 - q))
                })
                .sum(),
        };
        Ok(total / n)
    }

    /// Gradient of [`Loss::value`] with respect to the prediction.
    pub fn gradient(self, pred: &[f64], target: &[f64]) -> Result<Vec<f64>> {
        if pred.len() != target.len() {
            return Err(Error::dims("loss", target.len(), pred.len()));
        }
        let n = pred.len() as f64;
        Ok(match self {
            Loss::Mse => pred
                .iter()
                .zip(target)
                .map(|(p, t)| 2.0 * (p - t) / n)
                .collect(),
            Loss::Bce => pred
                .iter()
                .zip(target)
                .map(|(&q, &t)| {
                    if !(BCE_CLAMP..=1.0 - BCE_CLAMP).contains(&q) {
                        // flat region of the clamp
                        0.0
                    } else {
                        -(t / q - (1.0 - t) / (1.0 - q)) / n
                    }
                })
                .collect(),
        })
    }
}

/// One dense layer: `out_dim × in_dim` weights, `out_dim` biases.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Layer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn new(weights: Matrix, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if bias.len() != weights.rows() {
            return Err(Error::dims("Layer::new", weights.rows(), bias.len()));
        }
        Ok(Layer {
            weights,
            bias,
            activation,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    /// `W y + b`.
    pub fn pre_activation(&self, y_prev: &[f64]) -> Result<Vec<f64>> {
        let mut z = self.weights.matvec(y_prev)?;
        for (zi, bi) in z.iter_mut().zip(&self.bias) {
            *zi += bi;
        }
        Ok(z)
    }

    pub fn forward(&self, y_prev: &[f64]) -> Result<Vec<f64>> {
        let mut z = self.pre_activation(y_prev)?;
        z.iter_mut().for_each(|v| *v = self.activation.apply(*v));
        Ok(z)
    }

    /// Weight matrix with the bias appended as a trailing column.
    pub fn augmented_weights(&self) -> Matrix {
        let (rows, cols) = (self.out_dim(), self.in_dim());
        let mut m = Matrix::zeros(rows, cols + 1);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, self.weights.get(i, j));
            }
            m.set(i, cols, self.bias[i]);
        }
        m
    }

    fn check(&self) -> Result<()> {
        if self.bias.len() != self.weights.rows() {
            return Err(Error::dims("Layer", self.weights.rows(), self.bias.len()));
        }
        Ok(())
    }
}

/// `f(W y_prev + b)`.
pub fn layer_forward(layer: &Layer, y_prev: &[f64]) -> Result<Vec<f64>> {
    layer.forward(y_prev)
}

/// Width and activation of one layer, used to build a [`Network`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct LayerSpec {
    pub width: usize,
    pub activation: Activation,
}

/// Ordered stack of dimension-compatible layers; the parameter vector θ.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "NetworkRepr", into = "NetworkRepr"))]
pub struct Network {
    layers: Vec<Layer>,
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkRepr {
    layers: Vec<Layer>,
}

#[cfg(feature = "serde")]
impl TryFrom<NetworkRepr> for Network {
    type Error = Error;

    fn try_from(repr: NetworkRepr) -> Result<Self> {
        Network::new(repr.layers)
    }
}

#[cfg(feature = "serde")]
impl From<Network> for NetworkRepr {
    fn from(net: Network) -> Self {
        NetworkRepr { layers: net.layers }
    }
}

impl Network {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        for layer in &layers {
            layer.check()?;
        }
        for pair in layers.windows(2) {
            if pair[1].in_dim() != pair[0].out_dim() {
                return Err(Error::dims("Network::new", pair[0].out_dim(), pair[1].in_dim()));
            }
        }
        Ok(Network { layers })
    }

    /// Uniform `[-s, s]` weights with `s = sqrt(6 / (in + out))`, zero biases.
    pub fn init(input_dim: usize, topology: &[LayerSpec], stream: &mut RandomStream) -> Result<Self> {
        let mut layers = Vec::with_capacity(topology.len());
        let mut in_dim = input_dim;
        for spec in topology {
            if spec.width == 0 {
                return Err(Error::param("topology", "layer width must be positive"));
            }
            let fan = (in_dim + spec.width) as f64;
            let s = if fan > 0.0 { libm::sqrt(6.0 / fan) } else { 0.0 };
            let data = (0..spec.width * in_dim)
                .map(|_| -s + 2.0 * s * stream.uniform())
                .collect();
            let weights = Matrix::from_vec(spec.width, in_dim, data)?;
            layers.push(Layer::new(weights, vec![0.0; spec.width], spec.activation)?);
            in_dim = spec.width;
        }
        Network::new(layers)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layer_mut(&mut self, index: usize) -> Option<&mut Layer> {
        self.layers.get_mut(index)
    }

    pub fn input_dim(&self) -> Option<usize> {
        self.layers.first().map(Layer::in_dim)
    }

    pub fn output_dim(&self) -> Option<usize> {
        self.layers.last().map(Layer::out_dim)
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.as_slice().len() + l.bias.len())
            .sum()
    }

    /// θ as one vector: for each layer, weights row-major then biases.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_flat(&mut self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.num_params() {
            return Err(Error::dims("Network::set_flat", self.num_params(), theta.len()));
        }
        let mut rest = theta;
        for l in &mut self.layers {
            let nw = l.weights.as_slice().len();
            l.weights.as_mut_slice().copy_from_slice(&rest[..nw]);
            rest = &rest[nw..];
            let nb = l.bias.len();
            l.bias.copy_from_slice(&rest[..nb]);
            rest = &rest[nb..];
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<ForwardTrace> {
        forward_masked(self, x, None)
    }

    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = x.to_vec();
        for layer in &self.layers {
            y = layer.forward(&y)?;
        }
        Ok(y)
    }
}

/// All intermediate values of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    /// `inputs[l]` is what layer `l` consumed; `inputs[0]` is `x`.
    pub inputs: Vec<Vec<f64>>,
    pub pre_activations: Vec<Vec<f64>>,
    pub prediction: Vec<f64>,
}

pub fn forward(net: &Network, x: &[f64]) -> Result<ForwardTrace> {
    net.forward(x)
}

/// A bias-augmented 0/1 weight mask applied to one layer during a pass.
#[derive(Debug, Clone, Copy)]
pub struct AppliedMask<'a> {
    pub layer: usize,
    /// `out_dim × (in_dim + 1)`; the last column masks the bias.
    pub mask: &'a Matrix,
}

fn effective_layer(layer: &Layer, mask: &Matrix) -> Result<Layer> {
    let (rows, cols) = (layer.out_dim(), layer.in_dim());
    if mask.rows() != rows {
        return Err(Error::dims("mask rows", rows, mask.rows()));
    }
    if mask.cols() != cols + 1 {
        return Err(Error::dims("mask cols", cols + 1, mask.cols()));
    }
    let mut weights = layer.weights.clone();
    let mut bias = layer.bias.clone();
    for i in 0..rows {
        for j in 0..cols {
            weights.set(i, j, mask.get(i, j) * weights.get(i, j));
        }
        bias[i] *= mask.get(i, cols);
    }
    Ok(Layer {
        weights,
        bias,
        activation: layer.activation,
    })
}

/// Forward pass with an optional weight mask on one layer.
pub fn forward_masked(
    net: &Network,
    x: &[f64],
    mask: Option<AppliedMask<'_>>,
) -> Result<ForwardTrace> {
    if let Some(m) = mask {
        if m.layer >= net.layers.len() {
            return Err(Error::param("mask layer", "index beyond network depth"));
        }
    }
    let mut inputs = Vec::with_capacity(net.layers.len());
    let mut pre_activations = Vec::with_capacity(net.layers.len());
    let mut y = x.to_vec();
    for (l, layer) in net.layers.iter().enumerate() {
        let z = match mask {
            Some(m) if m.layer == l => effective_layer(layer, m.mask)?.pre_activation(&y)?,
            _ => layer.pre_activation(&y)?,
        };
        let next: Vec<f64> = z.iter().map(|&v| layer.activation.apply(v)).collect();
        inputs.push(core::mem::replace(&mut y, next));
        pre_activations.push(z);
    }
    Ok(ForwardTrace {
        inputs,
        pre_activations,
        prediction: y,
    })
}

/// Gradient of a loss with respect to each layer's weights and biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub layers: Vec<LayerGradient>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl Gradient {
    pub fn zeros_like(net: &Network) -> Self {
        Gradient {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGradient {
                    weights: Matrix::zeros(l.out_dim(), l.in_dim()),
                    bias: vec![0.0; l.out_dim()],
                })
                .collect(),
        }
    }

    /// Same ordering as [`Network::flatten`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    /// Inverse of [`Gradient::flatten`] for a network of the given shape.
    pub fn from_flat(net: &Network, flat: &[f64]) -> Result<Self> {
        let mut g = Gradient::zeros_like(net);
        if flat.len() != net.num_params() {
            return Err(Error::dims("Gradient::from_flat", net.num_params(), flat.len()));
        }
        let mut rest = flat;
        for l in &mut g.layers {
            let nw = l.weights.as_slice().len();
            l.weights.as_mut_slice().copy_from_slice(&rest[..nw]);
            rest = &rest[nw..];
            let nb = l.bias.len();
            l.bias.copy_from_slice(&rest[..nb]);
            rest = &rest[nb..];
        }
        Ok(g)
    }

    pub fn add_assign(&mut self, other: &Gradient) -> Result<()> {
        if self.layers.len() != other.layers.len() {
            return Err(Error::dims("Gradient::add_assign", self.layers.len(), other.layers.len()));
        }
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights.check_same_shape(&b.weights, "Gradient::add_assign")?;
            if a.bias.len() != b.bias.len() {
                return Err(Error::dims("Gradient::add_assign", a.bias.len(), b.bias.len()));
            }
            for (x, y) in a.weights.as_mut_slice().iter_mut().zip(b.weights.as_slice()) {
                *x += y;
            }
            for (x, y) in a.bias.iter_mut().zip(&b.bias) {
                *x += y;
            }
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            l.weights.scale(factor);
            l.bias.iter_mut().for_each(|b| *b *= factor);
        }
    }
}

/// Per-sample loss at `x`.
pub fn sample_loss(net: &Network, x: &[f64], target: &[f64], loss: Loss) -> Result<f64> {
    loss.value(&net.predict(x)?, target)
}

/// Exact gradient of the per-sample loss by backpropagation.
pub fn backward(net: &Network, x: &[f64], target: &[f64], loss: Loss) -> Result<Gradient> {
    backward_masked(net, x, target, loss, None).map(|(g, _)| g)
}

/// Backpropagation through an optionally masked network. Also returns the
/// sample's loss.
pub fn backward_masked(
    net: &Network,
    x: &[f64],
    target: &[f64],
    loss: Loss,
    mask: Option<AppliedMask<'_>>,
) -> Result<(Gradient, f64)> {
    let trace = forward_masked(net, x, mask)?;
    let value = loss.value(&trace.prediction, target)?;
    let mut grad = Gradient::zeros_like(net);
    if net.layers.is_empty() {
        return Ok((grad, value));
    }
    let upstream = loss.gradient(&trace.prediction, target)?;
    let last = net.layers.len() - 1;
    let mut delta: Vec<f64> = upstream
        .iter()
        .zip(&trace.pre_activations[last])
        .map(|(g, &z)| g * net.layers[last].activation.derivative(z))
        .collect();

    for l in (0..=last).rev() {
        let layer = &net.layers[l];
        let input = &trace.inputs[l];
        let m = mask.filter(|m| m.layer == l).map(|m| m.mask);
        let lg = &mut grad.layers[l];
        for (i, &d) in delta.iter().enumerate() {
            for (j, &y) in input.iter().enumerate() {
                let r = m.map_or(1.0, |m| m.get(i, j));
                lg.weights.set(i, j, r * d * y);
            }
            let rb = m.map_or(1.0, |m| m.get(i, layer.in_dim()));
            lg.bias[i] = rb * d;
        }
        if l == 0 {
            break;
        }
        let back = match m {
            Some(m) => effective_layer(layer, m)?.weights.matvec_transposed(&delta)?,
            None => layer.weights.matvec_transposed(&delta)?,
        };
        let prev = &net.layers[l - 1];
        delta = back
            .iter()
            .zip(&trace.pre_activations[l - 1])
            .map(|(b, &z)| b * prev.activation.derivative(z))
            .collect();
    }
    Ok((grad, value))
}

/// Max relative error between `backward` and central finite differences.
pub fn grad_check(net: &Network, x: &[f64], target: &[f64], loss: Loss) -> Result<f64> {
    let analytic = backward(net, x, target, loss)?;
    grad_check_against(net, x, target, loss, &analytic)
}

/// Like [`grad_check`], but for a caller-supplied analytic gradient.
///
/// Each coordinate's error is `|a - n| / max(1e-12, |a| + |n|)`. Parameters
/// that can move a relu pre-activation across its kink are skipped: every
/// parameter at or below a relu layer holding a pre-activation within
/// [`RELU_KINK_MARGIN`] of zero, and any parameter whose ±h perturbation
/// flips the sign of some relu pre-activation.
pub fn grad_check_against(
    net: &Network,
    x: &[f64],
    target: &[f64],
    loss: Loss,
    analytic: &Gradient,
) -> Result<f64> {
    let theta = net.flatten();
    let analytic = analytic.flatten();
    if analytic.len() != theta.len() {
        return Err(Error::dims("grad_check", theta.len(), analytic.len()));
    }
    let base = net.forward(x)?;
    let excluded_below = kink_layer_bound(net, &base);
    let layer_of = layer_index_map(net);

    let mut probe = net.clone();
    let mut worst = 0.0f64;
    for (i, &a) in analytic.iter().enumerate() {
        if excluded_below.is_some_and(|bound| layer_of[i] <= bound) {
            continue;
        }
        let mut shifted = theta.clone();
        shifted[i] = theta[i] + GRAD_CHECK_STEP;
        probe.set_flat(&shifted)?;
        let plus = probe.forward(x)?;
        shifted[i] = theta[i] - GRAD_CHECK_STEP;
        probe.set_flat(&shifted)?;
        let minus = probe.forward(x)?;
        if relu_sign_changed(net, &base, &plus) || relu_sign_changed(net, &base, &minus) {
            continue;
        }
        let lp = loss.value(&plus.prediction, target)?;
        let lm = loss.value(&minus.prediction, target)?;
        let numeric = (lp - lm) / (2.0 * GRAD_CHECK_STEP);
        let err = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-12);
        worst = worst.max(err);
    }
    Ok(worst)
}

fn layer_index_map(net: &Network) -> Vec<usize> {
    net.layers
        .iter()
        .enumerate()
        .flat_map(|(l, layer)| core::iter::repeat_n(l, layer.weights.as_slice().len() + layer.bias.len()))
        .collect()
}

fn kink_layer_bound(net: &Network, trace: &ForwardTrace) -> Option<usize> {
    net.layers
        .iter()
        .zip(&trace.pre_activations)
        .enumerate()
        .filter(|(_, (layer, z))| {
            layer.activation == Activation::Relu && z.iter().any(|v| v.abs() < RELU_KINK_MARGIN)
        })
        .map(|(l, _)| l)
        .last()
}

fn relu_sign_changed(net: &Network, a: &ForwardTrace, b: &ForwardTrace) -> bool {
    net.layers
        .iter()
        .zip(a.pre_activations.iter().zip(&b.pre_activations))
        .filter(|(layer, _)| layer.activation == Activation::Relu)
        .any(|(_, (za, zb))| za.iter().zip(zb).any(|(u, v)| (*u > 0.0) != (*v > 0.0)))
}
