//! Explicit regularizers: L1/L2 penalties, Dropout and DropConnect masks,
//! and post-training weight scaling.
//!
//! `p` is always the retention probability: a mask entry of `1` keeps the
//! unit or weight. A neuron mask becomes a weight mask by repeating it down
//! every row of the bias-augmented weight matrix, with the bias column fixed
//! to one; see [`embed_neuron_mask`].

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::net::{Activation, Layer, Network};
use crate::numkit::{hadamard, l1_norm, l2_norm_sq, sample, Dist, Matrix, RandomStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PenaltyKind {
    L1,
    L2,
}

/// `alpha · R(θ)` added to the loss.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Penalty {
    pub kind: PenaltyKind,
    pub alpha: f64,
}

impl Penalty {
    pub fn new(kind: PenaltyKind, alpha: f64) -> Result<Self> {
        let p = Penalty { kind, alpha };
        p.validate().map(|_| p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::param("alpha", "must be finite and >= 0"));
        }
        Ok(())
    }

    /// `alpha · R(θ)`.
    pub fn value(&self, theta: &[f64]) -> f64 {
        let r = match self.kind {
            PenaltyKind::L1 => l1_norm(theta),
            PenaltyKind::L2 => l2_norm_sq(theta),
        };
        self.alpha * r
    }
}

pub fn penalized_loss(base: f64, theta: &[f64], penalty: &Penalty) -> f64 {
    base + penalty.value(theta)
}

/// `alpha · sign(θ)` (with `sign(0) = 0`) for L1, `2 alpha θ` for L2.
pub fn penalty_grad(theta: &[f64], penalty: &Penalty) -> Vec<f64> {
    let a = penalty.alpha;
    match penalty.kind {
        PenaltyKind::L1 => theta
            .iter()
            .map(|&t| {
                if t > 0.0 {
                    a
                } else if t < 0.0 {
                    -a
                } else {
                    0.0
                }
            })
            .collect(),
        PenaltyKind::L2 => theta.iter().map(|&t| 2.0 * a * t).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DropGranularity {
    /// Dropout: one Bernoulli draw per input unit.
    Neuron,
    /// DropConnect: one Bernoulli draw per weight (bias included).
    Weight,
}

/// Where and how masks are applied during training.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct DropSpec {
    /// Retention probability.
    pub p: f64,
    pub granularity: DropGranularity,
    /// Index of the layer whose input (or weights) are masked.
    pub layer: usize,
}

impl DropSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::param("drop.p", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Per-neuron 0/1 mask `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuronMask(Vec<f64>);

impl NeuronMask {
    pub fn new(r: Vec<f64>) -> Result<Self> {
        if r.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::param("neuron mask", "entries must be 0 or 1"));
        }
        Ok(NeuronMask(r))
    }

    pub fn ones(n: usize) -> Self {
        NeuronMask(vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Per-weight 0/1 mask `R`, shaped like the bias-augmented weight matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMask(Matrix);

impl WeightMask {
    pub fn new(r: Matrix) -> Result<Self> {
        if r.as_slice().iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::param("weight mask", "entries must be 0 or 1"));
        }
        Ok(WeightMask(r))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }
}

/// Mask for one layer, at either granularity.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerMask {
    Neuron(NeuronMask),
    Weight(WeightMask),
}

impl LayerMask {
    /// The equivalent bias-augmented weight mask for a layer with `out_dim` rows.
    pub fn to_weight_mask(&self, out_dim: usize) -> WeightMask {
        match self {
            LayerMask::Neuron(r) => embed_neuron_mask(r, out_dim),
            LayerMask::Weight(w) => w.clone(),
        }
    }
}

/// `f(W (r * y) + b)`.
pub fn dropout_forward(layer: &Layer, y_prev: &[f64], mask: &NeuronMask) -> Result<Vec<f64>> {
    if mask.len() != y_prev.len() {
        return Err(Error::dims("dropout_forward", y_prev.len(), mask.len()));
    }
    layer.forward(&hadamard(mask.as_slice(), y_prev)?)
}

/// `y` with a trailing `1` for the bias column.
pub fn augment_input(y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(y.len() + 1);
    out.extend_from_slice(y);
    out.push(1.0);
    out
}

/// `f((R * W_aug) y_aug)`.
pub fn dropconnect_forward(
    w_aug: &Matrix,
    activation: Activation,
    y_prev_aug: &[f64],
    mask: &WeightMask,
) -> Result<Vec<f64>> {
    let masked = mask.matrix().hadamard(w_aug)?;
    let mut z = masked.matvec(y_prev_aug)?;
    z.iter_mut().for_each(|v| *v = activation.apply(*v));
    Ok(z)
}

/// Dropout mask `r` as a DropConnect mask: every row repeats `r` across the
/// input columns; the trailing bias column is all ones.
pub fn embed_neuron_mask(mask: &NeuronMask, out_dim: usize) -> WeightMask {
    let in_dim = mask.len();
    let mut m = Matrix::filled(out_dim, in_dim + 1, 1.0);
    for i in 0..out_dim {
        for (j, &r) in mask.as_slice().iter().enumerate() {
            m.set(i, j, r);
        }
    }
    WeightMask(m)
}

pub fn sample_neuron_mask(p: f64, n: usize, stream: &mut RandomStream) -> Result<NeuronMask> {
    Ok(NeuronMask(sample(&Dist::bernoulli(p)?, n, stream)?))
}

/// Independent Bernoulli(p) per entry of an `out_dim × (in_dim + 1)` mask.
pub fn sample_weight_mask(
    p: f64,
    out_dim: usize,
    in_dim: usize,
    stream: &mut RandomStream,
) -> Result<WeightMask> {
    let draws = sample(&Dist::bernoulli(p)?, out_dim * (in_dim + 1), stream)?;
    Ok(WeightMask(Matrix::from_vec(out_dim, in_dim + 1, draws)?))
}

pub fn sample_layer_mask(spec: &DropSpec, layer: &Layer, stream: &mut RandomStream) -> Result<LayerMask> {
    Ok(match spec.granularity {
        DropGranularity::Neuron => LayerMask::Neuron(sample_neuron_mask(spec.p, layer.in_dim(), stream)?),
        DropGranularity::Weight => {
            LayerMask::Weight(sample_weight_mask(spec.p, layer.out_dim(), layer.in_dim(), stream)?)
        }
    })
}

/// Factor applied to masked layers' weights after training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ScaleMode {
    /// Multiply by `1/p`.
    InverseP,
    /// Multiply by `p`, matching the expected training-time input.
    #[default]
    RetentionP,
}

/// Scales the weights (not biases) of `layers` by `p` or `1/p`.
pub fn inference_scale(net: &Network, p: f64, mode: ScaleMode, layers: &[usize]) -> Result<Network> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param("p", "must lie in [0, 1]"));
    }
    if mode == ScaleMode::InverseP && p == 0.0 {
        return Err(Error::param("p", "1/p scaling needs p > 0"));
    }
    let factor = match mode {
        ScaleMode::InverseP => 1.0 / p,
        ScaleMode::RetentionP => p,
    };
    let mut out = net.clone();
    for &l in layers {
        let layer = out
            .layer_mut(l)
            .ok_or_else(|| Error::param("layer", "index beyond network depth"))?;
        if factor != 1.0 {
            layer.weights.scale(factor);
        }
    }
    Ok(out)
}

/// Maximum `n` accepted by [`count_mask_patterns`].
pub const MAX_MASK_UNITS: u32 = 30;

/// Number of distinct thinned networks reachable with `n` maskable units.
pub fn count_mask_patterns(n_units: u32) -> Result<u64> {
    if n_units > MAX_MASK_UNITS {
        return Err(Error::param("n_units", "at most 30 units"));
    }
    Ok(1u64 << n_units)
}

/// Every neuron mask of length `n`, in binary counting order.
pub fn enumerate_neuron_masks(n: u32) -> Result<Vec<NeuronMask>> {
    let total = count_mask_patterns(n)?;
    Ok((0..total)
        .map(|code| NeuronMask((0..n).map(|j| ((code >> j) & 1) as f64).collect()))
        .collect())
}
