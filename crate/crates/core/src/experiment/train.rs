use alloc::vec::Vec;
use core::borrow::Borrow;

use crate::augment::AugmentSpec;
use crate::data::Sample;
use crate::error::{Error, Result};
use crate::net::{backward_masked, AppliedMask, Gradient, LayerSpec, Loss, Network};
use crate::numkit::RandomStream;
use crate::regularize::{
    inference_scale, penalty_grad, sample_layer_mask, DropSpec, LayerMask, Penalty, ScaleMode,
};

/// Any epoch loss above this aborts training.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MaskGranularity {
    PerEpoch,
    #[default]
    PerMinibatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Sampling {
    /// Shuffle without replacement each epoch, then cut consecutive minibatches.
    #[default]
    Shuffle,
    /// Draw each epoch's `n` presentations uniformly with replacement.
    WithReplacement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields))]
pub enum AugmentMode {
    /// New noise for every presentation of every sample.
    #[default]
    Fresh,
    /// A fixed augmented set of `copies` per original, generated once and
    /// trained on together with the originals.
    Frozen { copies: usize },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Augmentation {
    pub spec: AugmentSpec,
    #[cfg_attr(feature = "serde", serde(default))]
    pub mode: AugmentMode,
}

/// Hyperparameters of one SGD run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub eta: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub loss: Loss,
    pub penalty: Option<Penalty>,
    pub drop: Option<DropSpec>,
    pub augmentation: Option<Augmentation>,
    pub mask_granularity: MaskGranularity,
    pub scale_mode: ScaleMode,
    pub sampling: Sampling,
}

impl TrainConfig {
    pub fn new(eta: f64, epochs: usize, batch_size: usize, seed: u64, loss: Loss) -> Self {
        TrainConfig {
            eta,
            epochs,
            batch_size,
            seed,
            loss,
            penalty: None,
            drop: None,
            augmentation: None,
            mask_granularity: MaskGranularity::default(),
            scale_mode: ScaleMode::default(),
            sampling: Sampling::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(Error::param("eta", "must be finite and > 0"));
        }
        if self.batch_size == 0 {
            return Err(Error::param("batch_size", "must be positive"));
        }
        if let Some(p) = &self.penalty {
            p.validate()?;
        }
        if let Some(d) = &self.drop {
            d.validate()?;
        }
        if let Some(a) = &self.augmentation {
            a.spec.validate()?;
        }
        Ok(())
    }
}

/// Final parameters and the mean training loss of every epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: Network,
    pub epoch_losses: Vec<f64>,
}

/// Initial parameters for a run seeded with `seed`.
pub fn init_network(input_dim: usize, topology: &[LayerSpec], seed: u64) -> Result<Network> {
    Network::init(input_dim, topology, &mut RandomStream::new(seed).split("init"))
}

/// `θ - η g`.
pub fn sgd_step(theta: &Network, grad: &Gradient, eta: f64) -> Result<Network> {
    if grad.layers.len() != theta.layers().len() {
        return Err(Error::dims("sgd_step", theta.layers().len(), grad.layers.len()));
    }
    let mut out = theta.clone();
    for (l, g) in grad.layers.iter().enumerate() {
        let layer = out.layer_mut(l).expect("index checked above");
        layer.weights.check_same_shape(&g.weights, "sgd_step")?;
        if layer.bias.len() != g.bias.len() {
            return Err(Error::dims("sgd_step", layer.bias.len(), g.bias.len()));
        }
        for (w, d) in layer.weights.as_mut_slice().iter_mut().zip(g.weights.as_slice()) {
            *w -= eta * d;
        }
        for (b, d) in layer.bias.iter_mut().zip(&g.bias) {
            *b -= eta * d;
        }
    }
    Ok(out)
}

/// Mask in force for one minibatch.
#[derive(Debug, Clone, Copy)]
pub struct ActiveMask<'a> {
    pub layer: usize,
    pub mask: &'a LayerMask,
}

/// Mean per-sample gradient over `batch`, plus the penalty gradient.
pub fn minibatch_gradient<S: Borrow<Sample>>(
    theta: &Network,
    batch: &[S],
    loss: Loss,
    penalty: Option<&Penalty>,
    mask: Option<ActiveMask<'_>>,
) -> Result<Gradient> {
    minibatch_gradient_and_loss(theta, batch, loss, penalty, mask).map(|(g, _)| g)
}

/// As [`minibatch_gradient`]; also returns the mean loss (penalty included).
pub fn minibatch_gradient_and_loss<S: Borrow<Sample>>(
    theta: &Network,
    batch: &[S],
    loss: Loss,
    penalty: Option<&Penalty>,
    mask: Option<ActiveMask<'_>>,
) -> Result<(Gradient, f64)> {
    if batch.is_empty() {
        return Err(Error::Empty("minibatch"));
    }
    let weight_mask = match mask {
        Some(m) => {
            let layer = theta
                .layers()
                .get(m.layer)
                .ok_or_else(|| Error::param("drop.layer", "index beyond network depth"))?;
            Some((m.layer, m.mask.to_weight_mask(layer.out_dim())))
        }
        None => None,
    };
    let applied = weight_mask.as_ref().map(|(layer, w)| AppliedMask {
        layer: *layer,
        mask: w.matrix(),
    });

    let mut total = Gradient::zeros_like(theta);
    let mut loss_sum = 0.0;
    for s in batch {
        let s = s.borrow();
        let (g, value) = backward_masked(theta, &s.x, &s.y, loss, applied)?;
        total.add_assign(&g)?;
        loss_sum += value;
    }
    let k = batch.len() as f64;
    total.scale(1.0 / k);
    let mut mean_loss = loss_sum / k;
    if let Some(p) = penalty {
        let theta_flat = theta.flatten();
        let pg = Gradient::from_flat(theta, &penalty_grad(&theta_flat, p))?;
        total.add_assign(&pg)?;
        mean_loss += p.value(&theta_flat);
    }
    Ok((total, mean_loss))
}

/// Minibatch SGD over `train_rows` starting from `init`.
///
/// Streams split from `config.seed`: `"shuffle"` orders presentations,
/// `"mask"` draws Dropout/DropConnect masks, `"augment"` draws noise. After
/// the last epoch the masked layer's weights are rescaled per
/// `config.scale_mode`.
pub fn train<S: Borrow<Sample>>(
    config: &TrainConfig,
    init: Network,
    train_rows: &[S],
) -> Result<TrainOutcome> {
    config.validate()?;
    if train_rows.is_empty() {
        return Err(Error::MissingSplit("train"));
    }
    if let Some(d) = &config.drop {
        if d.layer >= init.layers().len() {
            return Err(Error::param("drop.layer", "index beyond network depth"));
        }
    }
    if config.epochs == 0 {
        return Ok(TrainOutcome {
            params: init,
            epoch_losses: Vec::new(),
        });
    }

    let root = RandomStream::new(config.seed);
    let mut order_stream = root.split("shuffle");
    let mut mask_stream = root.split("mask");
    let mut noise_stream = root.split("augment");

    let mut pool: Vec<Sample> = train_rows.iter().map(|s| s.borrow().clone()).collect();
    let fresh = match &config.augmentation {
        Some(Augmentation {
            spec,
            mode: AugmentMode::Frozen { copies },
        }) => {
            let originals = pool.len();
            for _ in 0..*copies {
                for i in 0..originals {
                    let (x, y) = spec.augment(&pool[i], &mut noise_stream)?;
                    pool.push(Sample { x, z: pool[i].z.clone(), y });
                }
            }
            None
        }
        Some(Augmentation {
            spec,
            mode: AugmentMode::Fresh,
        }) => Some(spec),
        None => None,
    };
    let n = pool.len();
    let batch_size = config.batch_size.min(n);

    let mut theta = init;
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..n).collect();
    let mut batch: Vec<Sample> = Vec::with_capacity(batch_size);
    for epoch in 0..config.epochs {
        match config.sampling {
            Sampling::Shuffle => order_stream.shuffle(&mut order),
            Sampling::WithReplacement => order
                .iter_mut()
                .for_each(|i| *i = order_stream.below(n)),
        }
        let mut epoch_mask = match (&config.drop, config.mask_granularity) {
            (Some(d), MaskGranularity::PerEpoch) => {
                Some(sample_layer_mask(d, &theta.layers()[d.layer], &mut mask_stream)?)
            }
            _ => None,
        };
        let mut weighted = 0.0;
        for chunk in order.chunks(batch_size) {
            batch.clear();
            for &i in chunk {
                let s = &pool[i];
                match fresh {
                    Some(spec) => {
                        let (x, y) = spec.augment(s, &mut noise_stream)?;
                        batch.push(Sample { x, z: None, y });
                    }
                    None => batch.push(s.clone()),
                }
            }
            if let (Some(d), MaskGranularity::PerMinibatch) = (&config.drop, config.mask_granularity) {
                epoch_mask = Some(sample_layer_mask(d, &theta.layers()[d.layer], &mut mask_stream)?);
            }
            let active = match (&config.drop, &epoch_mask) {
                (Some(d), Some(m)) => Some(ActiveMask { layer: d.layer, mask: m }),
                _ => None,
            };
            let (g, value) =
                minibatch_gradient_and_loss(&theta, &batch, config.loss, config.penalty.as_ref(), active)?;
            weighted += value * chunk.len() as f64;
            theta = sgd_step(&theta, &g, config.eta)?;
        }
        let epoch_loss = weighted / n as f64;
        if !epoch_loss.is_finite() || epoch_loss > DIVERGENCE_THRESHOLD {
            return Err(Error::Divergence {
                epoch,
                loss: epoch_loss,
            });
        }
        epoch_losses.push(epoch_loss);
    }

    if let Some(d) = &config.drop {
        theta = inference_scale(&theta, d.p, config.scale_mode, &[d.layer])?;
    }
    Ok(TrainOutcome {
        params: theta,
        epoch_losses,
    })
}
