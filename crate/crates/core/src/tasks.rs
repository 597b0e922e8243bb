//! Named, versioned synthetic tasks. Each generator is fully determined by
//! its name; changing one means publishing a new version.

use alloc::vec;
use alloc::vec::Vec;

use crate::augment::{decode, AugmentSpec, Decoder, NoiseSpec, Target};
use crate::data::{Dataset, Sample, Split};
use crate::experiment::verify::two_class_blobs;
use crate::experiment::{AugmentMode, Augmentation, TrainConfig};
use crate::net::{Activation, LayerSpec, Loss};
use crate::numkit::{dot, Dist, Matrix, RandomStream};

pub const LINREG2D_V1: &str = "linreg2d-v1";
pub const HIER_Z4X16_V1: &str = "hier-z4x16-v1";
pub const XOR2_V1: &str = "xor2-v1";
pub const AND2_V1: &str = "and2-v1";
pub const PARITY3_V1: &str = "parity3-v1";
pub const MAJORITY3_V1: &str = "majority3-v1";
pub const BLOBS2_V1: &str = "blobs2-v1";

pub const BUILTIN_TASKS: [&str; 7] = [
    LINREG2D_V1,
    HIER_Z4X16_V1,
    XOR2_V1,
    AND2_V1,
    PARITY3_V1,
    MAJORITY3_V1,
    BLOBS2_V1,
];

/// Generating weights of `linreg2d-v1`.
pub const LINREG2D_WEIGHTS: [f64; 2] = [1.5, -0.8];

/// Builds a builtin task's dataset by name.
pub fn builtin(name: &str) -> Option<Dataset> {
    Some(match name {
        LINREG2D_V1 => linreg2d_v1(),
        HIER_Z4X16_V1 => hier_z4x16_v1().dataset(),
        XOR2_V1 | AND2_V1 | PARITY3_V1 | MAJORITY3_V1 => boolean_domain(name)?,
        BLOBS2_V1 => {
            let rows = two_class_blobs(100, 1.0, &mut RandomStream::new(0xB10B_5002));
            Dataset::from_rows(rows.into_iter().map(|s| (Split::Train, s)).collect()).ok()?
        }
        _ => return None,
    })
}

/// Decoder shipped with a builtin task, for feature-space augmentation.
pub fn builtin_decoder(name: &str) -> Option<Decoder> {
    (name == HIER_Z4X16_V1).then(|| hier_z4x16_v1().decoder)
}

/// `y = 1.5 x₀ - 0.8 x₁ + 0.1 ε` with `x, ε` standard normal.
///
/// 64 train rows with inputs and targets centred to exactly zero mean, so an
/// L2 penalty on the bias and input noise agree on a zero intercept, plus
/// 64 uncentred validation rows from the same law.
pub fn linreg2d_v1() -> Dataset {
    let mut s = RandomStream::new(0x11AE_2D01);
    let mut draw = |n: usize| -> Vec<(Vec<f64>, f64)> {
        (0..n)
            .map(|_| {
                let x = vec![s.standard_normal(), s.standard_normal()];
                let y = LINREG2D_WEIGHTS[0] * x[0] + LINREG2D_WEIGHTS[1] * x[1] + 0.1 * s.standard_normal();
                (x, y)
            })
            .collect()
    };
    let mut train = draw(64);
    let val = draw(64);
    let n = train.len() as f64;
    let mx0 = train.iter().map(|(x, _)| x[0]).sum::<f64>() / n;
    let mx1 = train.iter().map(|(x, _)| x[1]).sum::<f64>() / n;
    let my = train.iter().map(|(_, y)| y).sum::<f64>() / n;
    for (x, y) in &mut train {
        x[0] -= mx0;
        x[1] -= mx1;
        *y -= my;
    }
    let mut d = Dataset::new();
    for (x, y) in train {
        d.push(Split::Train, Sample::new(x, vec![y])).expect("fixed dims");
    }
    for (x, y) in val {
        d.push(Split::Val, Sample::new(x, vec![y])).expect("fixed dims");
    }
    d
}

/// Hierarchical task: latent `z ∈ R⁴`, input `x = tanh(A z + c) ∈ R¹⁶`,
/// target `y = tanh(v·z)` depending on `z` only.
#[derive(Debug, Clone, PartialEq)]
pub struct HierTask {
    pub decoder: Decoder,
    pub label_weights: Vec<f64>,
    /// 2048 rows carrying `x`, `z` and `y`.
    pub domain: Vec<Sample>,
}

pub const HIER_FEATURE_DIM: usize = 4;
pub const HIER_INPUT_DIM: usize = 16;
pub const HIER_DOMAIN_SIZE: usize = 2048;
pub const HIER_TRAIN_SIZE: usize = 32;

pub fn hier_z4x16_v1() -> HierTask {
    let mut s = RandomStream::new(0x41E2_0416);
    let a: Vec<f64> = (0..HIER_INPUT_DIM * HIER_FEATURE_DIM)
        .map(|_| 0.6 * s.standard_normal())
        .collect();
    let a = Matrix::from_vec(HIER_INPUT_DIM, HIER_FEATURE_DIM, a).expect("fixed dims");
    let c: Vec<f64> = (0..HIER_INPUT_DIM).map(|_| 0.1 * s.standard_normal()).collect();
    let decoder = Decoder::AffineActivation {
        a,
        c,
        activation: Activation::Tanh,
    };
    let label_weights: Vec<f64> = (0..HIER_FEATURE_DIM).map(|_| 0.8 * s.standard_normal()).collect();
    let domain = (0..HIER_DOMAIN_SIZE)
        .map(|_| {
            let z: Vec<f64> = (0..HIER_FEATURE_DIM).map(|_| s.standard_normal()).collect();
            let x = decode(&decoder, &z).expect("fixed dims");
            let y = libm::tanh(dot(&label_weights, &z).expect("fixed dims"));
            Sample::with_features(x, z, vec![y])
        })
        .collect();
    HierTask {
        decoder,
        label_weights,
        domain,
    }
}

/// Shipped setup for the feature-noise experiment on `hier-z4x16-v1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureNoisePreset {
    pub topology: Vec<LayerSpec>,
    pub base: TrainConfig,
    pub augmentation: Augmentation,
    pub seeds: Vec<u64>,
}

pub const HIER_FEATURE_SIGMA: f64 = 0.05;

impl HierTask {
    /// 16→32 tanh→1, MSE, SGD at 0.05 for 1000 epochs in batches of 8,
    /// additive N(0, 0.05²) on `z` redrawn per presentation, seeds 1..=10.
    pub fn feature_noise_preset(&self) -> FeatureNoisePreset {
        let noise = NoiseSpec::additive(Dist::Gaussian {
            mean: 0.0,
            stddev: HIER_FEATURE_SIGMA,
        });
        FeatureNoisePreset {
            topology: vec![
                LayerSpec {
                    width: 32,
                    activation: Activation::Tanh,
                },
                LayerSpec {
                    width: 1,
                    activation: Activation::Identity,
                },
            ],
            base: TrainConfig::new(0.05, 1000, 8, 0, Loss::Mse),
            augmentation: Augmentation {
                spec: AugmentSpec {
                    noise,
                    target: Target::Feature,
                    decoder: Some(self.decoder.clone()),
                },
                mode: AugmentMode::Fresh,
            },
            seeds: (1..=10).collect(),
        }
    }

    /// First 32 rows train, the next 1008 val, the remaining 1008 domain-only.
    pub fn dataset(&self) -> Dataset {
        let val_end = HIER_TRAIN_SIZE + (HIER_DOMAIN_SIZE - HIER_TRAIN_SIZE) / 2;
        let rows = self
            .domain
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let split = if i < HIER_TRAIN_SIZE {
                    Split::Train
                } else if i < val_end {
                    Split::Val
                } else {
                    Split::Domain
                };
                (split, s.clone())
            })
            .collect();
        Dataset::from_rows(rows).expect("fixed dims")
    }
}

/// Enumerable boolean domains: every input in `{0,1}^k`, a fixed train
/// subset, and the remaining inputs tagged as domain-only.
fn boolean_domain(name: &str) -> Option<Dataset> {
    let (k, train_codes, f): (u32, &[u32], fn(u32) -> bool) = match name {
        XOR2_V1 => (2, &[0b00, 0b11], |c| c.count_ones() % 2 == 1),
        AND2_V1 => (2, &[0b00, 0b01, 0b11], |c| c == 0b11),
        PARITY3_V1 => (3, &[0, 1, 2, 4], |c| c.count_ones() % 2 == 1),
        MAJORITY3_V1 => (3, &[0, 3, 5, 7, 6], |c| c.count_ones() >= 2),
        _ => return None,
    };
    let mut d = Dataset::new();
    for code in 0..(1u32 << k) {
        let x: Vec<f64> = (0..k).map(|j| ((code >> j) & 1) as f64).collect();
        let y = vec![if f(code) { 1.0 } else { 0.0 }];
        let split = if train_codes.contains(&code) {
            Split::Train
        } else {
            Split::Domain
        };
        d.push(split, Sample::new(x, y)).ok()?;
    }
    Some(d)
}

/// Every enumerable toy domain shipped with the crate.
pub fn enumerable_domains() -> Vec<(&'static str, Dataset)> {
    [XOR2_V1, AND2_V1, PARITY3_V1, MAJORITY3_V1]
        .into_iter()
        .filter_map(|n| boolean_domain(n).map(|d| (n, d)))
        .collect()
}
