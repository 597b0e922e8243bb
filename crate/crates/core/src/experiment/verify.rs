//! Desk-scale checks of the equivalences between noise injection and
//! explicit regularization. Each check yields an [`EquivalenceReport`] whose
//! `pass` is exactly `discrepancy <= tolerance`.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::borrow::Borrow;

use super::gap::{gap_estimate_from, gap_exact_from, mean_loss, Memorizer};
use super::train::{init_network, train, AugmentMode, Augmentation, TrainConfig};
use crate::augment::{noise_multiplicative, scheme_check, AugmentSpec, NoiseSpec, SchemeTolerances, Target};
use crate::data::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::net::{grad_check, Activation, Layer, LayerSpec, Loss, Network};
use crate::numkit::{dot, l2_norm_sq, mean_and_sd, Dist, Matrix, RandomStream};
use crate::regularize::{
    augment_input, count_mask_patterns, dropconnect_forward, dropout_forward, embed_neuron_mask,
    enumerate_neuron_masks, sample_neuron_mask, Penalty, PenaltyKind,
};

/// Stable identifiers of the checks.
pub mod claims {
    pub const DROPCONNECT_REDUCTION: &str = "dropconnect-reduction";
    pub const GRADIENT_CHECK: &str = "gradient-check";
    pub const NOISE_PENALTY: &str = "input-noise-penalty";
    pub const L2_VS_NOISE: &str = "l2-vs-noise-training";
    pub const MEMORIZER_GAP: &str = "memorizer-gap";
    pub const DROPOUT_AS_NOISE: &str = "dropout-multiplicative-noise";
    pub const SCHEME_IDENTITY: &str = "scheme-check-identity";
    pub const SCHEME_MEAN_SHIFT: &str = "scheme-check-mean-shift";
    pub const SCHEME_VARIANCE: &str = "scheme-check-variance-inflation";
    pub const FEATURE_NOISE: &str = "feature-noise-regularizes";
    pub const MASK_COUNT: &str = "mask-count";
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct EquivalenceReport {
    pub claim: String,
    pub discrepancy: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Monte-Carlo draws, trials, cases or seeds behind the figure.
    pub samples: usize,
    #[cfg_attr(feature = "serde", serde(default))]
    pub std_error: Option<f64>,
    /// Violations of an identity that must hold exactly.
    #[cfg_attr(feature = "serde", serde(default))]
    pub exact_failures: usize,
}

impl EquivalenceReport {
    pub fn new(claim: &str, discrepancy: f64, tolerance: f64, samples: usize) -> Self {
        EquivalenceReport {
            claim: claim.to_string(),
            discrepancy,
            tolerance,
            pass: discrepancy <= tolerance,
            samples,
            std_error: None,
            exact_failures: 0,
        }
    }
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

fn random_layer(stream: &mut RandomStream, out_dim: usize, in_dim: usize, activation: Activation) -> Result<Layer> {
    let w = (0..out_dim * in_dim).map(|_| 4.0 * stream.uniform() - 2.0).collect();
    let b = (0..out_dim).map(|_| 2.0 * stream.uniform() - 1.0).collect();
    Layer::new(Matrix::from_vec(out_dim, in_dim, w)?, b, activation)
}

/// Dropout through a neuron mask against DropConnect through the embedded
/// weight mask, on random layers up to 6×6; any bit difference is a failure.
pub fn verify_dropconnect_reduction(n_cases: usize, stream: &mut RandomStream) -> Result<EquivalenceReport> {
    let mut failures = 0;
    for case in 0..n_cases {
        let out_dim = 1 + stream.below(6);
        let in_dim = 1 + stream.below(6);
        let activation = Activation::ALL[case % Activation::ALL.len()];
        let layer = random_layer(stream, out_dim, in_dim, activation)?;
        let y: Vec<f64> = (0..in_dim).map(|_| 6.0 * stream.uniform() - 3.0).collect();
        let p = stream.uniform();
        let r = sample_neuron_mask(p, in_dim, stream)?;
        let a = dropout_forward(&layer, &y, &r)?;
        let c = dropconnect_forward(
            &layer.augmented_weights(),
            activation,
            &augment_input(&y),
            &embed_neuron_mask(&r, out_dim),
        )?;
        if bits(&a) != bits(&c) {
            failures += 1;
        }
    }
    let mut report = EquivalenceReport::new(claims::DROPCONNECT_REDUCTION, failures as f64, 0.0, n_cases);
    report.exact_failures = failures;
    Ok(report)
}

/// Random network with depth 1–3 and widths 1–6. Under BCE the output layer
/// is a sigmoid so predictions are probabilities.
pub fn random_network(stream: &mut RandomStream, loss: Loss) -> Result<Network> {
    let depth = 1 + stream.below(3);
    let input_dim = 1 + stream.below(6);
    let mut topology = Vec::with_capacity(depth);
    for l in 0..depth {
        let width = 1 + stream.below(6);
        let activation = if l + 1 == depth && loss == Loss::Bce {
            Activation::Sigmoid
        } else {
            Activation::ALL[stream.below(4)]
        };
        topology.push(LayerSpec { width, activation });
    }
    let mut net = Network::init(input_dim, &topology, stream)?;
    // nonzero biases so every bias gradient is exercised
    let mut theta = net.flatten();
    let mut offset = 0;
    for layer in net.layers() {
        offset += layer.weights.as_slice().len();
        for b in &mut theta[offset..offset + layer.bias.len()] {
            *b = stream.uniform() - 0.5;
        }
        offset += layer.bias.len();
    }
    net.set_flat(&theta)?;
    Ok(net)
}

/// Backprop against central differences on `n_nets` random networks,
/// alternating MSE and BCE.
pub fn verify_gradients(n_nets: usize, stream: &mut RandomStream) -> Result<EquivalenceReport> {
    let mut worst = 0.0f64;
    for k in 0..n_nets {
        let loss = if k % 2 == 0 { Loss::Mse } else { Loss::Bce };
        let net = random_network(stream, loss)?;
        let in_dim = net.input_dim().unwrap_or(0);
        let out_dim = net.output_dim().unwrap_or(0);
        let x: Vec<f64> = (0..in_dim).map(|_| 2.0 * stream.uniform() - 1.0).collect();
        let t: Vec<f64> = (0..out_dim)
            .map(|_| match loss {
                Loss::Mse => 2.0 * stream.uniform() - 1.0,
                Loss::Bce => stream.uniform(),
            })
            .collect();
        worst = worst.max(grad_check(&net, &x, &t, loss)?);
    }
    Ok(EquivalenceReport::new(
        claims::GRADIENT_CHECK,
        worst,
        crate::net::GRAD_CHECK_STEP,
        n_nets,
    ))
}

/// Monte-Carlo check that gaussian input noise adds `σ² ‖w‖²` to the
/// expected squared error of the linear model `w·x`.
///
/// Each draw contributes `(w·(x+r) - t)² - (w·x - t)²`; the check passes when
/// the sample mean lies within three standard errors of `σ² ‖w‖²`.
pub fn verify_noise_penalty(
    w: &[f64],
    x: &[f64],
    t: f64,
    sigma: f64,
    n_mc: usize,
    stream: &mut RandomStream,
) -> Result<EquivalenceReport> {
    if n_mc < 1000 {
        return Err(Error::param("n_mc", "need at least 1000 draws"));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::param("sigma", "must be finite and >= 0"));
    }
    let clean = dot(w, x)? - t;
    let clean_loss = clean * clean;
    let mut diffs = Vec::with_capacity(n_mc);
    for _ in 0..n_mc {
        let mut pred = 0.0;
        for (wi, xi) in w.iter().zip(x) {
            pred += wi * (xi + sigma * stream.standard_normal());
        }
        let e = pred - t;
        diffs.push(e * e - clean_loss);
    }
    let (mean, sd) = mean_and_sd(&diffs);
    let se = sd / libm::sqrt(n_mc as f64);
    let closed_form = sigma * sigma * l2_norm_sq(w);
    let mut report = EquivalenceReport::new(claims::NOISE_PENALTY, (mean - closed_form).abs(), 3.0 * se, n_mc);
    report.std_error = Some(se);
    Ok(report)
}

/// [`verify_noise_penalty`] once per seed (stream `RandomStream::new(seed)`);
/// the discrepancy is the number of failing seeds, against an allowance of
/// `seeds.len() - min_pass`.
pub fn verify_noise_penalty_pass_rate(
    w: &[f64],
    x: &[f64],
    t: f64,
    sigma: f64,
    n_mc: usize,
    seeds: &[u64],
    min_pass: usize,
) -> Result<EquivalenceReport> {
    if seeds.is_empty() {
        return Err(Error::Empty("seeds"));
    }
    if min_pass > seeds.len() {
        return Err(Error::param("min_pass", "exceeds the number of seeds"));
    }
    let mut failures = 0usize;
    for &seed in seeds {
        if !verify_noise_penalty(w, x, t, sigma, n_mc, &mut RandomStream::new(seed))?.pass {
            failures += 1;
        }
    }
    let allowance = (seeds.len() - min_pass) as f64;
    Ok(EquivalenceReport::new(claims::NOISE_PENALTY, failures as f64, allowance, seeds.len()))
}

/// Identity-activation, zero-bias layer with both dimensions drawn from
/// `1..=max_dim` and standard normal weights, plus a standard normal input.
pub fn random_linear_layer(max_dim: usize, stream: &mut RandomStream) -> Result<(Layer, Vec<f64>)> {
    if max_dim == 0 {
        return Err(Error::param("max_dim", "must be positive"));
    }
    let out = 1 + stream.below(max_dim);
    let inp = 1 + stream.below(max_dim);
    let w = (0..out * inp).map(|_| stream.standard_normal()).collect();
    let layer = Layer::new(Matrix::from_vec(out, inp, w)?, vec![0.0; out], Activation::Identity)?;
    let y = (0..inp).map(|_| stream.standard_normal()).collect();
    Ok((layer, y))
}

/// Dropout on a layer's input as multiplicative Bernoulli noise.
///
/// Every trial draws one mask and checks that `dropout_forward` equals
/// `layer_forward` on `r * y` bit for bit. Across trials the mean of
/// `W (r * y)` must lie within four standard errors of `p W y`; the
/// tolerance carries a `1e-12` relative floor for zero-variance cases.
pub fn verify_dropout_as_noise(
    layer: &Layer,
    y_prev: &[f64],
    p: f64,
    n_trials: usize,
    stream: &mut RandomStream,
) -> Result<EquivalenceReport> {
    if n_trials == 0 {
        return Err(Error::Empty("trials"));
    }
    let out_dim = layer.out_dim();
    let mut failures = 0;
    let mut linear: Vec<Vec<f64>> = vec![Vec::with_capacity(n_trials); out_dim];
    for _ in 0..n_trials {
        let r = sample_neuron_mask(p, y_prev.len(), stream)?;
        let masked = noise_multiplicative(y_prev, r.as_slice())?;
        let a = dropout_forward(layer, y_prev, &r)?;
        let b = layer.forward(&masked)?;
        if bits(&a) != bits(&b) {
            failures += 1;
        }
        for (acc, v) in linear.iter_mut().zip(layer.weights.matvec(&masked)?) {
            acc.push(v);
        }
    }
    let expected: Vec<f64> = layer.weights.matvec(y_prev)?.iter().map(|v| p * v).collect();
    let mut discrepancy = 0.0f64;
    let mut se_max = 0.0f64;
    let mut scale = 0.0f64;
    for (values, e) in linear.iter().zip(&expected) {
        let (mean, sd) = mean_and_sd(values);
        discrepancy = discrepancy.max((mean - e).abs());
        se_max = se_max.max(sd / libm::sqrt(n_trials as f64));
        scale = scale.max(e.abs());
    }
    let tolerance = 4.0 * se_max + 1e-12 * (1.0 + scale);
    let mut report = if failures > 0 {
        EquivalenceReport::new(claims::DROPOUT_AS_NOISE, f64::INFINITY, tolerance, n_trials)
    } else {
        EquivalenceReport::new(claims::DROPOUT_AS_NOISE, discrepancy, tolerance, n_trials)
    };
    report.std_error = Some(se_max);
    report.exact_failures = failures;
    Ok(report)
}

/// Outcome of [`verify_l2_vs_noise_training`].
#[derive(Debug, Clone, PartialEq)]
pub struct L2NoiseOutcome {
    pub report: EquivalenceReport,
    /// Trained on clean data with an L2 penalty of `alpha`.
    pub penalized: Network,
    /// Trained with fresh gaussian input noise of stddev `sigma`.
    pub noised: Network,
}

/// Default relative tolerance for trained-weight comparisons.
pub const WEIGHT_TOLERANCE: f64 = 0.05;

/// `max |a - b| / max(max |a|, max |b|)`, `0` when both are zero.
pub fn relative_max_diff(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if diff == 0.0 {
        return 0.0;
    }
    let scale = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs()));
    diff / scale
}

/// Trains the same model twice from the same seed and initialization: once
/// with an L2 penalty `alpha` on clean data, once on inputs with fresh
/// `N(0, σ²)` noise per presentation and no penalty. Reports the relative
/// max-abs difference of the final parameters.
pub fn verify_l2_vs_noise_training<S: Borrow<Sample>>(
    train_rows: &[S],
    init: &Network,
    sigma: f64,
    alpha: f64,
    base: &TrainConfig,
    tolerance: f64,
) -> Result<L2NoiseOutcome> {
    let mut penalized_cfg = base.clone();
    penalized_cfg.penalty = Some(Penalty::new(PenaltyKind::L2, alpha)?);
    penalized_cfg.augmentation = None;
    penalized_cfg.drop = None;
    let mut noised_cfg = base.clone();
    noised_cfg.penalty = None;
    noised_cfg.drop = None;
    noised_cfg.augmentation = Some(Augmentation {
        spec: AugmentSpec {
            noise: NoiseSpec::additive(Dist::gaussian(0.0, sigma)?),
            target: Target::Input,
            decoder: None,
        },
        mode: AugmentMode::Fresh,
    });
    let penalized = train(&penalized_cfg, init.clone(), train_rows)?.params;
    let noised = train(&noised_cfg, init.clone(), train_rows)?.params;
    let discrepancy = relative_max_diff(&penalized.flatten(), &noised.flatten());
    Ok(L2NoiseOutcome {
        report: EquivalenceReport::new(claims::L2_VS_NOISE, discrepancy, tolerance, train_rows.len()),
        penalized,
        noised,
    })
}

/// A lookup memorizer fit on each domain's train split must have an exact
/// gap equal to its mean loss over the whole domain.
pub fn verify_memorizer_gap(domains: &[Dataset], loss: Loss) -> Result<EquivalenceReport> {
    let mut worst = 0.0f64;
    for data in domains {
        let train_rows = data.train();
        let domain = data.full_domain().ok_or(Error::MissingSplit("domain"))?;
        let fallback = vec![0.0; data.y_dim().unwrap_or(0)];
        let memo = Memorizer::fit(&train_rows, fallback);
        let report = gap_exact_from(&memo, &train_rows, &domain, loss)?;
        let full = mean_loss(&memo, &domain, loss)?;
        worst = worst.max((report.gap - full).abs());
    }
    Ok(EquivalenceReport::new(claims::MEMORIZER_GAP, worst, 1e-12, domains.len()))
}

/// Exhaustively enumerates neuron masks for `n = 0..=max_units` and counts
/// sizes `n` where the number of distinct masks differs from `2ⁿ`.
pub fn verify_mask_count(max_units: u32) -> Result<EquivalenceReport> {
    let mut mismatches = 0usize;
    for n in 0..=max_units {
        let mut codes: Vec<Vec<u64>> = enumerate_neuron_masks(n)?
            .iter()
            .map(|m| bits(m.as_slice()))
            .collect();
        codes.sort_unstable();
        codes.dedup();
        if codes.len() as u64 != count_mask_patterns(n)? {
            mismatches += 1;
        }
    }
    let mut report = EquivalenceReport::new(claims::MASK_COUNT, mismatches as f64, 0.0, max_units as usize + 1);
    report.exact_failures = mismatches;
    Ok(report)
}

/// Two gaussian classes in `R²` centred at `(±1, 0)` with per-axis stddev
/// `spread`, `per_class` rows each.
pub fn two_class_blobs(per_class: usize, spread: f64, stream: &mut RandomStream) -> Vec<Sample> {
    let mut out = Vec::with_capacity(2 * per_class);
    for i in 0..2 * per_class {
        let class = (i % 2) as f64;
        let cx = 2.0 * class - 1.0;
        let x = vec![cx + spread * stream.standard_normal(), spread * stream.standard_normal()];
        out.push(Sample::new(x, vec![class]));
    }
    out
}

/// Calibration of [`scheme_check`] over `trials` seeded datasets: the
/// identity generator must always pass, a +10 shift must fail on all but
/// 1%, and unit gaussian noise on low-variance data (stddev 0.05) must fail
/// the covariance check on all but 5%. Discrepancies count wrong outcomes.
pub fn verify_scheme_calibration(trials: usize, n_samples: usize, stream: &mut RandomStream) -> Result<Vec<EquivalenceReport>> {
    let input = |noise| AugmentSpec {
        noise,
        target: Target::Input,
        decoder: None,
    };
    let identity = input(NoiseSpec::multiplicative(Dist::bernoulli(1.0)?));
    let shift = input(NoiseSpec::additive(Dist::uniform(10.0, 10.0)?));
    let inflate = input(NoiseSpec::additive(Dist::gaussian(0.0, 1.0)?));

    let (mut identity_fail, mut shift_pass, mut inflate_cov_pass) = (0usize, 0usize, 0usize);
    for trial in 0..trials {
        let mut s = stream.split_index(trial as u64);
        let blobs = two_class_blobs(100, 1.0, &mut s);
        let tight = two_class_blobs(100, 0.05, &mut s);
        let tol = SchemeTolerances::default();
        if !scheme_check(&blobs, &identity, n_samples, tol, &mut s)?.pass {
            identity_fail += 1;
        }
        if scheme_check(&blobs, &shift, n_samples, tol, &mut s)?.pass {
            shift_pass += 1;
        }
        if scheme_check(&tight, &inflate, n_samples, tol, &mut s)?.cov_pass {
            inflate_cov_pass += 1;
        }
    }
    let allowance = |fraction: f64| libm::floor(fraction * trials as f64);
    Ok(vec![
        EquivalenceReport::new(claims::SCHEME_IDENTITY, identity_fail as f64, 0.0, trials),
        EquivalenceReport::new(claims::SCHEME_MEAN_SHIFT, shift_pass as f64, allowance(0.01), trials),
        EquivalenceReport::new(claims::SCHEME_VARIANCE, inflate_cov_pass as f64, allowance(0.05), trials),
    ])
}

/// Per-seed detail behind a feature-noise report.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureNoiseOutcome {
    pub report: EquivalenceReport,
    pub seeds: Vec<u64>,
    pub baseline_gaps: Vec<f64>,
    pub augmented_gaps: Vec<f64>,
    pub mean_baseline_gap: f64,
    pub mean_augmented_gap: f64,
    /// Seeds on which augmentation produced the strictly smaller gap.
    pub wins: usize,
}

/// Minimum number of seeds for [`verify_feature_noise_regularizes`].
pub const MIN_FEATURE_NOISE_SEEDS: usize = 10;

/// Baseline training against training with feature-space noise, on small
/// random train subsets of `domain`.
///
/// For each seed, `train_size` rows are drawn from `domain` (the rest is the
/// validation split), both arms start from the same initialization and use
/// the same seed, and the validation gap estimate of each is recorded. The
/// check passes when the mean augmented gap is below the mean baseline gap
/// and augmentation wins on at least 80% of seeds; the reported discrepancy
/// is the number of lost seeds (or every seed when the mean condition
/// fails), against a tolerance of `floor(0.2 · seeds)`.
pub fn verify_feature_noise_regularizes(
    domain: &[Sample],
    train_size: usize,
    topology: &[LayerSpec],
    base: &TrainConfig,
    augmentation: &Augmentation,
    seeds: &[u64],
) -> Result<FeatureNoiseOutcome> {
    if seeds.len() < MIN_FEATURE_NOISE_SEEDS {
        return Err(Error::param("seeds", "need at least 10 seeds"));
    }
    if train_size == 0 || train_size >= domain.len() {
        return Err(Error::param("train_size", "must leave a nonempty validation split"));
    }
    let first = domain[0].y.clone();
    if domain.iter().all(|s| s.y == first) {
        return Err(Error::param("labels", "task has zero label variance"));
    }
    let input_dim = domain[0].x.len();

    let mut baseline_gaps = Vec::with_capacity(seeds.len());
    let mut augmented_gaps = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let mut order: Vec<usize> = (0..domain.len()).collect();
        RandomStream::new(seed).split("subset").shuffle(&mut order);
        let train_rows: Vec<&Sample> = order[..train_size].iter().map(|&i| &domain[i]).collect();
        let val_rows: Vec<&Sample> = order[train_size..].iter().map(|&i| &domain[i]).collect();
        let init = init_network(input_dim, topology, seed)?;

        let mut cfg = base.clone();
        cfg.seed = seed;
        cfg.augmentation = None;
        let plain = train(&cfg, init.clone(), &train_rows)?.params;
        cfg.augmentation = Some(augmentation.clone());
        let noisy = train(&cfg, init, &train_rows)?.params;

        baseline_gaps.push(gap_estimate_from(&plain, &train_rows, &val_rows, cfg.loss)?.gap);
        augmented_gaps.push(gap_estimate_from(&noisy, &train_rows, &val_rows, cfg.loss)?.gap);
    }
    let n = seeds.len();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mean_baseline_gap = mean(&baseline_gaps);
    let mean_augmented_gap = mean(&augmented_gaps);
    let wins = baseline_gaps
        .iter()
        .zip(&augmented_gaps)
        .filter(|(b, a)| a < b)
        .count();
    let losses = if mean_augmented_gap < mean_baseline_gap { n - wins } else { n };
    let tolerance = libm::floor(0.2 * n as f64);
    Ok(FeatureNoiseOutcome {
        report: EquivalenceReport::new(claims::FEATURE_NOISE, losses as f64, tolerance, n),
        seeds: seeds.to_vec(),
        baseline_gaps,
        augmented_gaps,
        mean_baseline_gap,
        mean_augmented_gap,
        wins,
    })
}
