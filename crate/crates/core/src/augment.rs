//! Artificial data by noise injection.
//!
//! Noise `r` is applied additively (`x + r`) or multiplicatively (`r * x`)
//! either directly to inputs, to targets, or to a feature vector `z` that a
//! known [`Decoder`] then maps to an input (`x̂ = d(ẑ)`).
//!
//! [`scheme_check`] tests whether a generator preserves the class-conditional
//! distribution of the data it augments. It compares first and second
//! moments only; a pass means "moments match", not that the distributions
//! are equal.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::borrow::Borrow;

use crate::data::Sample;
use crate::error::{Error, Result};
use crate::net::Activation;
use crate::numkit::{add, hadamard, sample, Dist, Matrix, RandomStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum NoiseMode {
    Additive,
    Multiplicative,
}

/// Noise vector `r`: how it is combined and what it is drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct NoiseSpec {
    pub mode: NoiseMode,
    pub dist: Dist,
}

/// Emitted by [`NoiseSpec::warnings`]; never fatal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseWarning {
    /// Multiplicative gaussian noise whose mean is not 1 rescales `E[x̂]`.
    MultiplicativeMeanNotOne,
}

impl NoiseSpec {
    pub fn additive(dist: Dist) -> Self {
        NoiseSpec { mode: NoiseMode::Additive, dist }
    }

    pub fn multiplicative(dist: Dist) -> Self {
        NoiseSpec { mode: NoiseMode::Multiplicative, dist }
    }

    pub fn validate(&self) -> Result<()> {
        self.dist.validate()
    }

    pub fn warnings(&self) -> Vec<NoiseWarning> {
        match (self.mode, self.dist) {
            (NoiseMode::Multiplicative, Dist::Gaussian { mean, .. }) if mean != 1.0 => {
                vec![NoiseWarning::MultiplicativeMeanNotOne]
            }
            _ => Vec::new(),
        }
    }

    /// Draws `r` with one entry per component of `v` and combines it with `v`.
    pub fn apply(&self, v: &[f64], stream: &mut RandomStream) -> Result<Vec<f64>> {
        let r = sample(&self.dist, v.len(), stream)?;
        match self.mode {
            NoiseMode::Additive => noise_additive(v, &r),
            NoiseMode::Multiplicative => noise_multiplicative(v, &r),
        }
    }
}

/// `x + r`.
pub fn noise_additive(x: &[f64], r: &[f64]) -> Result<Vec<f64>> {
    add(x, r)
}

/// `r * x`.
pub fn noise_multiplicative(x: &[f64], r: &[f64]) -> Result<Vec<f64>> {
    hadamard(r, x)
}

/// Known map `d` from feature vectors to inputs.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum Decoder {
    Identity { dim: usize },
    /// `A z + c`.
    Affine { a: Matrix, c: Vec<f64> },
    /// `f(A z + c)`.
    AffineActivation { a: Matrix, c: Vec<f64>, activation: Activation },
    /// Stages applied first to last.
    Composed { stages: Vec<Decoder> },
}

impl Decoder {
    pub fn feature_dim(&self) -> usize {
        match self {
            Decoder::Identity { dim } => *dim,
            Decoder::Affine { a, .. } | Decoder::AffineActivation { a, .. } => a.cols(),
            Decoder::Composed { stages } => stages.first().map_or(0, Decoder::feature_dim),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Decoder::Identity { dim } => *dim,
            Decoder::Affine { a, .. } | Decoder::AffineActivation { a, .. } => a.rows(),
            Decoder::Composed { stages } => stages.last().map_or(0, Decoder::input_dim),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Decoder::Identity { .. } => Ok(()),
            Decoder::Affine { a, c } | Decoder::AffineActivation { a, c, .. } => {
                if a.rows() != c.len() {
                    return Err(Error::dims("decoder offset", a.rows(), c.len()));
                }
                Ok(())
            }
            Decoder::Composed { stages } => {
                if stages.is_empty() {
                    return Err(Error::Empty("composed decoder"));
                }
                for s in stages {
                    s.validate()?;
                }
                for pair in stages.windows(2) {
                    if pair[0].input_dim() != pair[1].feature_dim() {
                        return Err(Error::dims(
                            "composed decoder",
                            pair[0].input_dim(),
                            pair[1].feature_dim(),
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    fn apply(&self, z: &[f64]) -> Result<Vec<f64>> {
        match self {
            Decoder::Identity { dim } => {
                if z.len() != *dim {
                    return Err(Error::dims("decode", *dim, z.len()));
                }
                Ok(z.to_vec())
            }
            Decoder::Affine { a, c } => Ok(add(&a.matvec(z)?, c)?),
            Decoder::AffineActivation { a, c, activation } => {
                let mut x = add(&a.matvec(z)?, c)?;
                x.iter_mut().for_each(|v| *v = activation.apply(*v));
                Ok(x)
            }
            Decoder::Composed { stages } => {
                let mut v = z.to_vec();
                for s in stages {
                    v = s.apply(&v)?;
                }
                Ok(v)
            }
        }
    }
}

/// `d(ẑ)`.
pub fn decode(d: &Decoder, z_hat: &[f64]) -> Result<Vec<f64>> {
    d.validate()?;
    if z_hat.len() != d.feature_dim() {
        return Err(Error::dims("decode", d.feature_dim(), z_hat.len()));
    }
    d.apply(z_hat)
}

/// `d(z + r)`, `r ~ dist`.
pub fn augment_feature_additive(
    z: &[f64],
    dist: &Dist,
    d: &Decoder,
    stream: &mut RandomStream,
) -> Result<Vec<f64>> {
    let r = sample(dist, z.len(), stream)?;
    decode(d, &noise_additive(z, &r)?)
}

/// `d(r * z)`, `r ~ dist`.
pub fn augment_feature_multiplicative(
    z: &[f64],
    dist: &Dist,
    d: &Decoder,
    stream: &mut RandomStream,
) -> Result<Vec<f64>> {
    let r = sample(dist, z.len(), stream)?;
    decode(d, &noise_multiplicative(z, &r)?)
}

/// `(1 - ε) y + ε / K`.
pub fn label_smooth(y: &[f64], epsilon: f64) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::param("epsilon", "must lie in [0, 1)"));
    }
    if y.len() < 2 {
        return Err(Error::param("y", "need at least two classes"));
    }
    let sum: f64 = y.iter().sum();
    if (sum - 1.0).abs() > 1e-9 || y.iter().any(|&v| v < 0.0) {
        return Err(Error::param("y", "must be a probability vector summing to 1"));
    }
    let k = y.len() as f64;
    Ok(y.iter().map(|&v| (1.0 - epsilon) * v + epsilon / k).collect())
}

/// Which part of a sample the noise is injected into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Target {
    Input,
    /// Feature block `z`, decoded to an input.
    Feature,
    Label,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Input => "input",
            Target::Feature => "feature",
            Target::Label => "label",
        }
    }
}

/// A complete generator: noise, injection point, and decoder when needed.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct AugmentSpec {
    pub noise: NoiseSpec,
    pub target: Target,
    #[cfg_attr(feature = "serde", serde(default))]
    pub decoder: Option<Decoder>,
}

impl AugmentSpec {
    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        match (&self.target, &self.decoder) {
            (Target::Feature, None) => Err(Error::MissingFeatures("a decoder")),
            (_, Some(d)) => d.validate(),
            _ => Ok(()),
        }
    }

    /// One augmented copy of `s`. Inputs are replaced for input and feature
    /// targets; the target vector is replaced for label targets.
    pub fn augment(&self, s: &Sample, stream: &mut RandomStream) -> Result<(Vec<f64>, Vec<f64>)> {
        match self.target {
            Target::Input => Ok((self.noise.apply(&s.x, stream)?, s.y.clone())),
            Target::Label => Ok((s.x.clone(), self.noise.apply(&s.y, stream)?)),
            Target::Feature => {
                let d = self
                    .decoder
                    .as_ref()
                    .ok_or(Error::MissingFeatures("a decoder"))?;
                let z = s.z.as_ref().ok_or(Error::MissingFeatures("a feature block on every sample"))?;
                let z_hat = self.noise.apply(z, stream)?;
                Ok((decode(d, &z_hat)?, s.y.clone()))
            }
        }
    }
}

/// Generated sample with its mapping back to the original.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSample {
    pub x_hat: Vec<f64>,
    pub y: Vec<f64>,
    /// Index of the source row.
    pub origin_index: usize,
    pub target: Target,
    pub mode: NoiseMode,
}

/// `count` augmented samples; sample `i` comes from row `i mod n`.
pub fn generate_batch<S: Borrow<Sample>>(
    dataset: &[S],
    spec: &AugmentSpec,
    count: usize,
    stream: &mut RandomStream,
) -> Result<Vec<AugmentedSample>> {
    spec.validate()?;
    if count == 0 {
        return Ok(Vec::new());
    }
    if dataset.is_empty() {
        return Err(Error::Empty("source dataset"));
    }
    (0..count)
        .map(|i| {
            let origin_index = i % dataset.len();
            let (x_hat, y) = spec.augment(dataset[origin_index].borrow(), stream)?;
            Ok(AugmentedSample {
                x_hat,
                y,
                origin_index,
                target: spec.target,
                mode: spec.noise.mode,
            })
        })
        .collect()
}

/// Explicit tolerances for [`scheme_check`]; `None` means four standard
/// errors of the discrepancy estimator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SchemeTolerances {
    pub mean: Option<f64>,
    pub cov: Option<f64>,
}

/// Absolute floor on derived tolerances, so that exact copies of
/// zero-variance data are not failed by rounding.
pub const SCHEME_TOLERANCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassMoments {
    pub class: usize,
    pub n_original: usize,
    pub n_augmented: usize,
    pub mean_discrepancy: f64,
    pub cov_discrepancy: f64,
    pub tol_mean: f64,
    pub tol_cov: f64,
}

impl ClassMoments {
    pub fn mean_ok(&self) -> bool {
        self.mean_discrepancy <= self.tol_mean
    }

    pub fn cov_ok(&self) -> bool {
        self.cov_discrepancy <= self.tol_cov
    }
}

/// Result of a moment check of an augmentation generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeCheckReport {
    pub classes: Vec<ClassMoments>,
    pub mean_pass: bool,
    pub cov_pass: bool,
    pub pass: bool,
}

struct Moments {
    n: usize,
    mean: Vec<f64>,
    cov: Matrix,
}

fn moments(rows: &[Vec<f64>]) -> Moments {
    let n = rows.len();
    let dim = rows.first().map_or(0, Vec::len);
    let mut mean = vec![0.0; dim];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = Matrix::zeros(dim, dim);
    for r in rows {
        for i in 0..dim {
            for j in 0..dim {
                let v = cov.get(i, j) + (r[i] - mean[i]) * (r[j] - mean[j]);
                cov.set(i, j, v);
            }
        }
    }
    // plug-in (1/n) normalisation: exact replicas of a sample have the same moments
    cov.scale(1.0 / n.max(1) as f64);
    Moments { n, mean, cov }
}

/// Compares per-class input moments of original and augmented data.
///
/// For each class with `n` original rows, every row is augmented
/// `ceil(n_samples / n)` times. The mean discrepancy is the max-abs
/// difference of mean vectors; the covariance discrepancy the max-abs
/// difference of plug-in (1/n) covariance matrices. Default tolerances are four
/// standard errors: `sqrt(s²_o/n_o + s²_a/n_a)` per mean component and
/// `sqrt((Cᵢᵢ Cⱼⱼ + Cᵢⱼ²)/(n - 1))` summed in quadrature over both samples
/// per covariance entry, maximised over components.
pub fn scheme_check<S: Borrow<Sample>>(
    original: &[S],
    spec: &AugmentSpec,
    n_samples: usize,
    tolerances: SchemeTolerances,
    stream: &mut RandomStream,
) -> Result<SchemeCheckReport> {
    spec.validate()?;
    if original.is_empty() {
        return Err(Error::Empty("original dataset"));
    }
    if n_samples < 100 {
        return Err(Error::param("n_samples", "need at least 100 augmented samples per class"));
    }
    let mut by_class: BTreeMap<usize, Vec<&Sample>> = BTreeMap::new();
    for s in original {
        let s = s.borrow();
        by_class.entry(s.class()).or_default().push(s);
    }

    let mut classes = Vec::with_capacity(by_class.len());
    for (class, rows) in by_class {
        let reps = n_samples.div_ceil(rows.len());
        let mut augmented = Vec::with_capacity(reps * rows.len());
        for s in &rows {
            for _ in 0..reps {
                augmented.push(spec.augment(s, stream)?.0);
            }
        }
        let orig: Vec<Vec<f64>> = rows.iter().map(|s| s.x.clone()).collect();
        let o = moments(&orig);
        let a = moments(&augmented);
        if o.mean.len() != a.mean.len() {
            return Err(Error::dims("scheme_check", o.mean.len(), a.mean.len()));
        }
        let dim = o.mean.len();

        let mut mean_disc = 0.0f64;
        let mut mean_se = 0.0f64;
        for k in 0..dim {
            mean_disc = mean_disc.max((a.mean[k] - o.mean[k]).abs());
            let se = libm::sqrt(o.cov.get(k, k) / o.n as f64 + a.cov.get(k, k) / a.n as f64);
            mean_se = mean_se.max(se);
        }
        let mut cov_disc = 0.0f64;
        let mut cov_se = 0.0f64;
        let var_of = |m: &Moments, i: usize, j: usize| {
            let c = &m.cov;
            (c.get(i, i) * c.get(j, j) + c.get(i, j) * c.get(i, j)) / m.n.saturating_sub(1).max(1) as f64
        };
        for i in 0..dim {
            for j in 0..dim {
                cov_disc = cov_disc.max((a.cov.get(i, j) - o.cov.get(i, j)).abs());
                cov_se = cov_se.max(libm::sqrt(var_of(&o, i, j) + var_of(&a, i, j)));
            }
        }
        classes.push(ClassMoments {
            class,
            n_original: o.n,
            n_augmented: a.n,
            mean_discrepancy: mean_disc,
            cov_discrepancy: cov_disc,
            tol_mean: tolerances
                .mean
                .unwrap_or((4.0 * mean_se).max(SCHEME_TOLERANCE_FLOOR)),
            tol_cov: tolerances
                .cov
                .unwrap_or((4.0 * cov_se).max(SCHEME_TOLERANCE_FLOOR)),
        });
    }
    let mean_pass = classes.iter().all(ClassMoments::mean_ok);
    let cov_pass = classes.iter().all(ClassMoments::cov_ok);
    Ok(SchemeCheckReport {
        classes,
        mean_pass,
        cov_pass,
        pass: mean_pass && cov_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regularize::sample_neuron_mask;

    fn affine() -> Decoder {
        Decoder::Affine {
            a: Matrix::from_rows(&[[1., 1.], [1., -1.]]).unwrap(),
            c: vec![0., 0.],
        }
    }

    fn random_decoder(s: &mut RandomStream, feature_dim: usize) -> Decoder {
        let mut stage = |fd: usize, id: usize, act: Option<Activation>| {
            let a: Vec<f64> = (0..fd * id).map(|_| 2.0 * s.uniform() - 1.0).collect();
            let a = Matrix::from_vec(id, fd, a).unwrap();
            let c: Vec<f64> = (0..id).map(|_| s.uniform() - 0.5).collect();
            match act {
                Some(activation) => Decoder::AffineActivation { a, c, activation },
                None => Decoder::Affine { a, c },
            }
        };
        let first = stage(feature_dim, 5, Some(Activation::Tanh));
        let second = stage(5, 3, None);
        Decoder::Composed { stages: vec![first, second] }
    }

    #[test]
    fn additive_and_multiplicative_examples() {
        assert_eq!(noise_additive(&[1., 2.], &[0.5, -0.5]).unwrap(), vec![1.5, 1.5]);
        assert_eq!(noise_additive(&[3., 4.], &[0., 0.]).unwrap(), vec![3., 4.]);
        assert_eq!(noise_additive(&[0., 0.], &[3., 4.]).unwrap(), vec![3., 4.]);
        assert_eq!(noise_multiplicative(&[1., 2.], &[0., 1.]).unwrap(), vec![0., 2.]);
        assert_eq!(noise_multiplicative(&[7., -1.], &[1., 1.]).unwrap(), vec![7., -1.]);
        assert_eq!(noise_multiplicative(&[2., 3.], &[2., 2.]).unwrap(), vec![4., 6.]);
        assert!(noise_additive(&[1.], &[1., 2.]).is_err());
        assert!(noise_multiplicative(&[1.], &[]).is_err());
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode(&Decoder::Identity { dim: 2 }, &[1., 2.]).unwrap(), vec![1., 2.]);
        assert_eq!(decode(&affine(), &[2., 1.]).unwrap(), vec![3., 1.]);
        let sig = Decoder::AffineActivation {
            a: Matrix::from_rows(&[[0.]]).unwrap(),
            c: vec![0.],
            activation: Activation::Sigmoid,
        };
        assert_eq!(decode(&sig, &[7.]).unwrap(), vec![0.5]);
        assert!(decode(&affine(), &[1.]).is_err());
    }

    #[test]
    fn composed_decoder_checks_stage_dims() {
        let bad = Decoder::Composed {
            stages: vec![Decoder::Identity { dim: 3 }, affine()],
        };
        assert!(bad.validate().is_err());
        let good = Decoder::Composed {
            stages: vec![affine(), Decoder::Identity { dim: 2 }],
        };
        assert_eq!(decode(&good, &[2., 1.]).unwrap(), vec![3., 1.]);
    }

    #[test]
    fn zero_noise_feature_augmentation_is_decode() {
        let mut s = RandomStream::new(0);
        let z = [0.3, -1.0];
        let zero = Dist::Gaussian { mean: 0.0, stddev: 0.0 };
        assert_eq!(
            augment_feature_additive(&z, &zero, &affine(), &mut s).unwrap(),
            decode(&affine(), &z).unwrap()
        );
        let keep = Dist::Bernoulli { p: 1.0 };
        assert_eq!(
            augment_feature_multiplicative(&z, &keep, &affine(), &mut s).unwrap(),
            decode(&affine(), &z).unwrap()
        );
        let drop = Dist::Bernoulli { p: 0.0 };
        assert_eq!(
            augment_feature_multiplicative(&z, &drop, &affine(), &mut s).unwrap(),
            decode(&affine(), &[0., 0.]).unwrap()
        );
    }

    #[test]
    fn identity_decoder_reduces_to_input_noise() {
        for seed in 0..20 {
            let z = [0.5, -2.0, 1.25];
            let id = Decoder::Identity { dim: 3 };
            let dist = Dist::Gaussian { mean: 0.0, stddev: 0.3 };
            let mut a = RandomStream::new(seed);
            let mut b = RandomStream::new(seed);
            let feat = augment_feature_additive(&z, &dist, &id, &mut a).unwrap();
            let input = NoiseSpec::additive(dist).apply(&z, &mut b).unwrap();
            assert_eq!(feat, input);
            let mdist = Dist::Gaussian { mean: 1.0, stddev: 0.3 };
            let feat = augment_feature_multiplicative(&z, &mdist, &id, &mut a).unwrap();
            let input = NoiseSpec::multiplicative(mdist).apply(&z, &mut b).unwrap();
            assert_eq!(feat, input);
        }
    }

    #[test]
    fn feature_augmentation_is_decode_after_noise() {
        let mut gen = RandomStream::new(77);
        for seed in 0..100u64 {
            let d = random_decoder(&mut gen, 4);
            let z: Vec<f64> = (0..4).map(|_| 2.0 * gen.uniform() - 1.0).collect();
            let dist = Dist::Gaussian { mean: 0.0, stddev: 0.5 };
            let mut s = RandomStream::new(seed);
            let mut replay = s.clone();
            let got = augment_feature_additive(&z, &dist, &d, &mut s).unwrap();
            let r = sample(&dist, 4, &mut replay).unwrap();
            assert_eq!(got, decode(&d, &noise_additive(&z, &r).unwrap()).unwrap());

            let mdist = Dist::Bernoulli { p: 0.6 };
            let got = augment_feature_multiplicative(&z, &mdist, &d, &mut s).unwrap();
            let r = sample(&mdist, 4, &mut replay).unwrap();
            assert_eq!(got, decode(&d, &noise_multiplicative(&z, &r).unwrap()).unwrap());
        }
    }

    #[test]
    fn bernoulli_feature_noise_is_input_dropout_mask() {
        let z = [0.4, -1.5, 2.0, 0.25, 3.0];
        let id = Decoder::Identity { dim: 5 };
        for seed in 0..50 {
            let mut s = RandomStream::new(seed);
            let mut replay = s.clone();
            let x_hat =
                augment_feature_multiplicative(&z, &Dist::Bernoulli { p: 0.5 }, &id, &mut s).unwrap();
            let mask = sample_neuron_mask(0.5, 5, &mut replay).unwrap();
            assert_eq!(x_hat, hadamard(mask.as_slice(), &z).unwrap());
        }
    }

    #[test]
    fn label_smoothing_examples() {
        let out = label_smooth(&[0., 1.], 0.2).unwrap();
        assert!((out[0] - 0.1).abs() < 1e-15 && (out[1] - 0.9).abs() < 1e-15);
        assert_eq!(label_smooth(&[0.3, 0.7], 0.0).unwrap(), vec![0.3, 0.7]);
        let out = label_smooth(&[1., 0., 0., 0.], 0.4).unwrap();
        for (o, e) in out.iter().zip([0.7, 0.1, 0.1, 0.1]) {
            assert!((o - e).abs() < 1e-15);
        }
        assert!(label_smooth(&[0., 1.], 1.0).is_err());
        assert!(label_smooth(&[0., 1.], -0.1).is_err());
        assert!(label_smooth(&[0.5, 0.6], 0.1).is_err());
        assert!(label_smooth(&[1.0], 0.1).is_err());
    }

    #[test]
    fn label_smoothing_keeps_sum_and_argmax() {
        let mut s = RandomStream::new(12);
        for _ in 0..200 {
            let k = 2 + s.below(8);
            let hot = s.below(k);
            let mut y = vec![0.0; k];
            y[hot] = 1.0;
            let eps = s.uniform() * 0.999;
            let out = label_smooth(&y, eps).unwrap();
            assert!((out.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            let argmax = (0..k).fold(0, |b, i| if out[i] > out[b] { i } else { b });
            assert_eq!(argmax, hot);
        }
    }

    fn rows(n: usize, s: &mut RandomStream) -> Vec<Sample> {
        (0..n)
            .map(|i| {
                let x = vec![s.standard_normal(), 2.0 + 0.5 * s.standard_normal()];
                let z = vec![x[0], x[1]];
                Sample::with_features(x, z, vec![(i % 2) as f64])
            })
            .collect()
    }

    #[test]
    fn generate_batch_contracts() {
        let mut s = RandomStream::new(1);
        let data = rows(5, &mut s);
        let zero = AugmentSpec {
            noise: NoiseSpec::additive(Dist::Gaussian { mean: 0.0, stddev: 0.0 }),
            target: Target::Input,
            decoder: None,
        };
        assert!(generate_batch(&data, &zero, 0, &mut s).unwrap().is_empty());
        let batch = generate_batch(&data, &zero, 12, &mut s).unwrap();
        assert_eq!(batch.len(), 12);
        for (i, a) in batch.iter().enumerate() {
            assert_eq!(a.origin_index, i % 5);
            assert_eq!(a.x_hat, data[a.origin_index].x);
        }
        let noisy = AugmentSpec {
            noise: NoiseSpec::additive(Dist::Gaussian { mean: 0.0, stddev: 1.0 }),
            ..zero.clone()
        };
        let a = generate_batch(&data, &noisy, 7, &mut RandomStream::new(3)).unwrap();
        let b = generate_batch(&data, &noisy, 7, &mut RandomStream::new(3)).unwrap();
        assert_eq!(a, b);
        let missing = AugmentSpec { target: Target::Feature, ..zero };
        assert!(matches!(
            generate_batch(&data, &missing, 3, &mut s),
            Err(Error::MissingFeatures(_))
        ));
    }

    #[test]
    fn label_target_noises_y_only() {
        let data = vec![Sample::new(vec![1.0, 2.0], vec![1.0])];
        let spec = AugmentSpec {
            noise: NoiseSpec::additive(Dist::Uniform { lo: -0.25, hi: -0.25 }),
            target: Target::Label,
            decoder: None,
        };
        let out = generate_batch(&data, &spec, 1, &mut RandomStream::new(0)).unwrap();
        assert_eq!(out[0].x_hat, vec![1.0, 2.0]);
        assert_eq!(out[0].y, vec![0.75]);
    }

    #[test]
    fn multiplicative_gaussian_warns_off_unit_mean() {
        let off = NoiseSpec::multiplicative(Dist::Gaussian { mean: 0.0, stddev: 1.0 });
        assert_eq!(off.warnings(), vec![NoiseWarning::MultiplicativeMeanNotOne]);
        let on = NoiseSpec::multiplicative(Dist::Gaussian { mean: 1.0, stddev: 1.0 });
        assert!(on.warnings().is_empty());
    }

    #[test]
    fn scheme_check_identity_passes() {
        let mut s = RandomStream::new(2);
        let data = rows(60, &mut s);
        let id = AugmentSpec {
            noise: NoiseSpec::multiplicative(Dist::Bernoulli { p: 1.0 }),
            target: Target::Input,
            decoder: None,
        };
        let report = scheme_check(&data, &id, 100, SchemeTolerances::default(), &mut s).unwrap();
        assert!(report.pass);
        assert_eq!(report.classes.len(), 2);
        for c in &report.classes {
            assert!(c.mean_discrepancy < 1e-12 && c.cov_discrepancy < 1e-12);
            assert_eq!(c.n_original, 30);
            assert_eq!(c.n_augmented, 120);
        }
    }

    #[test]
    fn scheme_check_detects_shift_and_variance_inflation() {
        let mut s = RandomStream::new(8);
        let data = rows(80, &mut s);
        let shift = AugmentSpec {
            noise: NoiseSpec::additive(Dist::Uniform { lo: 10.0, hi: 10.0 }),
            target: Target::Input,
            decoder: None,
        };
        let r = scheme_check(&data, &shift, 200, SchemeTolerances::default(), &mut s).unwrap();
        assert!(!r.mean_pass && !r.pass);
        let low_var: Vec<Sample> = (0..200)
            .map(|i| Sample::new(vec![0.05 * s.standard_normal(), 0.05 * s.standard_normal()], vec![(i % 2) as f64]))
            .collect();
        let gauss = AugmentSpec {
            noise: NoiseSpec::additive(Dist::Gaussian { mean: 0.0, stddev: 1.0 }),
            ..shift
        };
        let r = scheme_check(&low_var, &gauss, 200, SchemeTolerances::default(), &mut s).unwrap();
        assert!(!r.cov_pass);
    }

    #[test]
    fn scheme_check_preconditions() {
        let mut s = RandomStream::new(0);
        let spec = AugmentSpec {
            noise: NoiseSpec::additive(Dist::Gaussian { mean: 0.0, stddev: 0.0 }),
            target: Target::Input,
            decoder: None,
        };
        let empty: Vec<Sample> = Vec::new();
        assert!(scheme_check(&empty, &spec, 100, SchemeTolerances::default(), &mut s).is_err());
        let data = rows(4, &mut s);
        assert!(scheme_check(&data, &spec, 99, SchemeTolerances::default(), &mut s).is_err());
    }
}
