use noisereg_core::augment::{AugmentSpec, NoiseSpec, Target};
use noisereg_core::data::{Dataset, Sample, Split};
use noisereg_core::experiment::*;
use noisereg_core::net::{backward, Activation, Gradient, Layer, LayerSpec, Loss, Network};
use noisereg_core::numkit::{Dist, Matrix, RandomStream};
use noisereg_core::regularize::{penalty_grad, DropGranularity, DropSpec, Penalty, PenaltyKind};
use noisereg_core::{tasks, Error};

fn linear(w: &[f64], b: f64) -> Network {
    let layer = Layer::new(
        Matrix::from_vec(1, w.len(), w.to_vec()).unwrap(),
        vec![b],
        Activation::Identity,
    )
    .unwrap();
    Network::new(vec![layer]).unwrap()
}

fn small_net(seed: u64) -> Network {
    let topo = [
        LayerSpec { width: 4, activation: Activation::Tanh },
        LayerSpec { width: 2, activation: Activation::Sigmoid },
    ];
    init_network(3, &topo, seed).unwrap()
}

fn random_rows(n: usize, stream: &mut RandomStream) -> Vec<Sample> {
    (0..n)
        .map(|_| {
            let x = (0..3).map(|_| 2.0 * stream.uniform() - 1.0).collect();
            let y = (0..2).map(|_| stream.uniform()).collect();
            Sample::new(x, y)
        })
        .collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
}

#[test]
fn sgd_step_examples() {
    let theta = linear(&[1.0], 1.0);
    let g = Gradient::from_flat(&theta, &[0.5, -0.5]).unwrap();
    let out = sgd_step(&theta, &g, 0.1).unwrap();
    assert_eq!(out.flatten(), vec![0.95, 1.05]);

    assert_eq!(sgd_step(&theta, &g, 0.0).unwrap(), theta);
    let zero = Gradient::zeros_like(&theta);
    assert_eq!(sgd_step(&theta, &zero, 0.1).unwrap(), theta);

    let other = linear(&[1.0, 2.0], 0.0);
    assert!(sgd_step(&other, &g, 0.1).is_err());
}

#[test]
fn sgd_step_is_affine_in_gradient() {
    let mut s = RandomStream::new(3);
    for seed in 0..20 {
        let theta = small_net(seed);
        let n = theta.num_params();
        let g1: Vec<f64> = (0..n).map(|_| s.standard_normal()).collect();
        let g2: Vec<f64> = (0..n).map(|_| s.standard_normal()).collect();
        let sum: Vec<f64> = g1.iter().zip(&g2).map(|(a, b)| a + b).collect();
        let eta = 0.05;
        let once = sgd_step(&theta, &Gradient::from_flat(&theta, &sum).unwrap(), eta).unwrap();
        let g1 = Gradient::from_flat(&theta, &g1).unwrap();
        let g2 = Gradient::from_flat(&theta, &g2).unwrap();
        let twice = sgd_step(&sgd_step(&theta, &g1, eta).unwrap(), &g2, eta).unwrap();
        assert!(max_abs_diff(&once.flatten(), &twice.flatten()) < 1e-15);
    }
}

#[test]
fn minibatch_of_one_is_backward() {
    let theta = small_net(1);
    let rows = random_rows(1, &mut RandomStream::new(9));
    let g = minibatch_gradient(&theta, &rows, Loss::Bce, None, None).unwrap();
    let b = backward(&theta, &rows[0].x, &rows[0].y, Loss::Bce).unwrap();
    assert_eq!(g.flatten(), b.flatten());
}

#[test]
fn minibatch_of_copies_is_single_gradient() {
    let theta = small_net(2);
    let row = random_rows(1, &mut RandomStream::new(4)).remove(0);
    let single = backward(&theta, &row.x, &row.y, Loss::Mse).unwrap().flatten();
    for k in [2, 4, 5, 8] {
        let batch = vec![row.clone(); k];
        let g = minibatch_gradient(&theta, &batch, Loss::Mse, None, None).unwrap();
        assert!(max_abs_diff(&g.flatten(), &single) < 1e-15, "k={k}");
    }
}

#[test]
fn minibatch_matches_per_sample_mean() {
    let mut s = RandomStream::new(11);
    for case in 0..50 {
        let theta = small_net(100 + case);
        let k = 1 + s.below(8);
        let rows = random_rows(k, &mut s);
        let loss = if case % 2 == 0 { Loss::Mse } else { Loss::Bce };

        let mut oracle = vec![0.0; theta.num_params()];
        for r in &rows {
            for (o, g) in oracle.iter_mut().zip(backward(&theta, &r.x, &r.y, loss).unwrap().flatten()) {
                *o += g;
            }
        }
        oracle.iter_mut().for_each(|o| *o /= k as f64);

        let g = minibatch_gradient(&theta, &rows, loss, None, None).unwrap();
        assert!(max_abs_diff(&g.flatten(), &oracle) < 1e-12);

        let penalty = Penalty::new(PenaltyKind::L2, 0.03).unwrap();
        let gp = minibatch_gradient(&theta, &rows, loss, Some(&penalty), None).unwrap();
        let extra = penalty_grad(&theta.flatten(), &penalty);
        let want: Vec<f64> = oracle.iter().zip(&extra).map(|(a, b)| a + b).collect();
        assert!(max_abs_diff(&gp.flatten(), &want) < 1e-12);
    }
}

#[test]
fn empty_minibatch_rejected() {
    let theta = small_net(0);
    let empty: Vec<Sample> = Vec::new();
    assert!(matches!(
        minibatch_gradient(&theta, &empty, Loss::Mse, None, None),
        Err(Error::Empty(_))
    ));
}

#[test]
fn zero_epochs_returns_init() {
    let init = small_net(5);
    let rows = random_rows(10, &mut RandomStream::new(5));
    let cfg = TrainConfig::new(0.1, 0, 4, 5, Loss::Bce);
    let out = train(&cfg, init.clone(), &rows).unwrap();
    assert_eq!(out.params, init);
    assert!(out.epoch_losses.is_empty());
}

#[test]
fn learns_y_equals_2x() {
    // least squares on exact data: w = 2, b = 0
    let rows: Vec<Sample> = (0..20)
        .map(|i| {
            let x = -1.0 + 0.1 * i as f64;
            Sample::new(vec![x], vec![2.0 * x])
        })
        .collect();
    let topo = [LayerSpec { width: 1, activation: Activation::Identity }];
    let init = init_network(1, &topo, 1).unwrap();
    let cfg = TrainConfig::new(0.1, 500, 4, 1, Loss::Mse);
    let out = train(&cfg, init, &rows).unwrap();
    let theta = out.params.flatten();
    assert!((theta[0] - 2.0).abs() < 1e-3, "{theta:?}");
    assert!(theta[1].abs() < 1e-3);
    assert_eq!(out.epoch_losses.len(), 500);
    assert!(out.epoch_losses[499] < out.epoch_losses[0]);
}

#[test]
fn training_is_bit_deterministic() {
    let rows = random_rows(24, &mut RandomStream::new(8));
    let init = small_net(8);
    let mut cfg = TrainConfig::new(0.2, 30, 5, 8, Loss::Bce);
    cfg.drop = Some(DropSpec {
        p: 0.7,
        granularity: DropGranularity::Weight,
        layer: 1,
    });
    cfg.penalty = Some(Penalty::new(PenaltyKind::L1, 1e-3).unwrap());
    cfg.augmentation = Some(Augmentation {
        spec: AugmentSpec {
            noise: NoiseSpec::additive(Dist::Gaussian { mean: 0.0, stddev: 0.1 }),
            target: Target::Input,
            decoder: None,
        },
        mode: AugmentMode::Fresh,
    });
    let a = train(&cfg, init.clone(), &rows).unwrap();
    let b = train(&cfg, init.clone(), &rows).unwrap();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.params.flatten()), bits(&b.params.flatten()));
    assert_eq!(bits(&a.epoch_losses), bits(&b.epoch_losses));

    cfg.seed = 9;
    let c = train(&cfg, init, &rows).unwrap();
    assert_ne!(bits(&a.epoch_losses), bits(&c.epoch_losses));
}

#[test]
fn divergence_is_reported_with_epoch() {
    let rows: Vec<Sample> = (0..8).map(|i| Sample::new(vec![i as f64], vec![3.0 * i as f64])).collect();
    let init = linear(&[0.0], 0.0);
    let cfg = TrainConfig::new(5.0, 100, 8, 0, Loss::Mse);
    match train(&cfg, init, &rows) {
        Err(Error::Divergence { epoch, loss }) => {
            assert!(epoch < 100);
            assert!(!(loss <= DIVERGENCE_THRESHOLD));
        }
        other => panic!("expected divergence, got {other:?}"),
    }
}

struct Constant(Vec<f64>);

impl Predictor for Constant {
    fn predict(&self, _: &[f64]) -> noisereg_core::Result<Vec<f64>> {
        Ok(self.0.clone())
    }
}

#[test]
fn memorizer_gap_on_xor() {
    let data = tasks::builtin(tasks::XOR2_V1).unwrap();
    let memo = Memorizer::fit(&data.train(), vec![0.0]);
    let report = gap_exact(&memo, &data, Loss::Mse).unwrap();
    assert_eq!(report.train_loss, 0.0);
    assert_eq!(report.gap, 0.5);
    assert_eq!(report.estimator, GapEstimator::Exact);
}

#[test]
fn memorizer_gap_matches_domain_loss_everywhere() {
    let domains: Vec<Dataset> = tasks::enumerable_domains().into_iter().map(|(_, d)| d).collect();
    let r = verify_memorizer_gap(&domains, Loss::Mse).unwrap();
    assert!(r.pass, "{r:?}");
    assert_eq!(r.discrepancy, 0.0);
}

#[test]
fn clamped_bce_leaves_memorizer_a_tiny_train_loss() {
    let data = tasks::builtin(tasks::XOR2_V1).unwrap();
    let memo = Memorizer::fit(&data.train(), vec![0.0]);
    let r = gap_exact(&memo, &data, Loss::Bce).unwrap();
    assert!(r.train_loss > 0.0 && r.train_loss < 2e-12);
}

#[test]
fn gap_trivial_cases() {
    let rows: Vec<Sample> = (0..6).map(|i| Sample::new(vec![i as f64], vec![0.0])).collect();
    let model = Constant(vec![0.3]);
    let r = gap_exact_from(&model, &rows[..2], &rows, Loss::Mse).unwrap();
    assert!(r.gap.abs() < 1e-15);

    let r = gap_estimate_from(&model, &rows, &rows, Loss::Mse).unwrap();
    assert_eq!(r.gap, 0.0);
    assert_eq!(r.estimator, GapEstimator::Validation);

    // per-sample losses 0.2 on train and 0.7 on val
    let train_rows = vec![Sample::new(vec![0.0], vec![0.0])];
    let val_rows = vec![Sample::new(vec![0.0], vec![0.0])];
    let r = gap_estimate_from(&Constant(vec![0.2f64.sqrt()]), &train_rows, &val_rows, Loss::Mse).unwrap();
    assert!((r.train_loss - 0.2).abs() < 1e-15);
    let val_model = Constant(vec![0.7f64.sqrt()]);
    let v = mean_loss(&val_model, &val_rows, Loss::Mse).unwrap();
    assert!((v - r.train_loss - 0.5).abs() < 1e-12);
}

#[test]
fn gap_missing_splits_rejected() {
    let mut d = Dataset::new();
    d.push(Split::Train, Sample::new(vec![0.0], vec![1.0])).unwrap();
    let model = Constant(vec![0.0]);
    assert!(matches!(gap_exact(&model, &d, Loss::Mse), Err(Error::MissingSplit(_))));
    assert!(matches!(gap_estimate(&model, &d, Loss::Mse), Err(Error::MissingSplit(_))));
}

fn parity_domain(bits: usize) -> Vec<Sample> {
    (0..1usize << bits)
        .map(|m| {
            let x: Vec<f64> = (0..bits).map(|b| ((m >> b) & 1) as f64).collect();
            let y = (m.count_ones() % 2) as f64;
            Sample::new(x, vec![y])
        })
        .collect()
}

#[test]
fn validation_estimate_converges_on_nested_splits() {
    let domain = parity_domain(6);
    // one even and one odd row memorized; the rest split into ones and zeros
    let train_rows = vec![domain[0].clone(), domain[1].clone()];
    let memo = Memorizer::fit(&train_rows, vec![0.0]);
    let rest: Vec<&Sample> = domain[2..].iter().collect();
    let ones: Vec<&Sample> = rest.iter().copied().filter(|s| s.y[0] == 1.0).collect();
    let zeros: Vec<&Sample> = rest.iter().copied().filter(|s| s.y[0] == 0.0).collect();
    assert_eq!(ones.len(), zeros.len());

    let target = mean_loss(&memo, &rest, Loss::Mse).unwrap();
    let mut val: Vec<&Sample> = Vec::new();
    let mut last = f64::INFINITY;
    for (a, b) in ones.iter().zip(&zeros) {
        val.push(a);
        let r = gap_estimate_from(&memo, &train_rows, &val, Loss::Mse).unwrap();
        let diff = (r.eval_loss - target).abs();
        assert!(diff < last, "{diff} after {last}");
        last = diff;
        val.push(b);
    }
    let r = gap_estimate_from(&memo, &train_rows, &val, Loss::Mse).unwrap();
    assert!((r.eval_loss - target).abs() < 1e-15);

    // the exact gap weights train rows into the domain mean
    let exact = gap_exact_from(&memo, &train_rows, &domain, Loss::Mse).unwrap();
    let n = domain.len() as f64;
    let weighted = (r.eval_loss * rest.len() as f64 + r.train_loss * 2.0) / n;
    assert!((exact.eval_loss - weighted).abs() < 1e-12);
}

#[test]
fn noise_penalty_examples() {
    let mut s = RandomStream::new(1);
    let r = verify_noise_penalty(&[1.0, 2.0], &[1.0, 1.0], 0.0, 0.1, 20_000, &mut s).unwrap();
    assert!(r.pass, "{r:?}");
    assert_eq!(r.claim, claims::NOISE_PENALTY);

    let r = verify_noise_penalty(&[1.0, 2.0], &[1.0, 1.0], 0.0, 1e-4, 5_000, &mut s).unwrap();
    assert!(r.pass && r.discrepancy < 1e-4, "{r:?}");

    let r = verify_noise_penalty(&[0.0, 0.0], &[1.0, 1.0], 0.5, 0.3, 1_000, &mut s).unwrap();
    assert!(r.pass);
    assert_eq!(r.discrepancy, 0.0);

    assert!(verify_noise_penalty(&[1.0], &[1.0], 0.0, 0.1, 999, &mut s).is_err());
}

#[test]
fn noise_penalty_monte_carlo_oracle() {
    // independent estimate of E[(w·(x+r) - t)²] - (w·x - t)²
    let (w, x, t, sigma) = ([0.5, -1.5, 2.0], [0.3, 0.1, -0.4], 0.7, 0.2);
    let mut s = RandomStream::new(77);
    let n = 200_000;
    let clean: f64 = w.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() - t;
    let mut acc = 0.0;
    for _ in 0..n {
        let e: f64 = w.iter().zip(&x).map(|(a, b)| a * (b + sigma * s.standard_normal())).sum::<f64>() - t;
        acc += e * e - clean * clean;
    }
    let mc = acc / n as f64;
    let closed = sigma * sigma * w.iter().map(|v| v * v).sum::<f64>();
    assert!((mc - closed).abs() < 2e-3, "{mc} vs {closed}");
}

#[test]
fn noise_penalty_pass_rate_is_calibrated() {
    let passes = (0..100)
        .filter(|&seed| {
            let mut s = RandomStream::new(seed);
            verify_noise_penalty(&[1.0, 2.0], &[1.0, 1.0], 0.0, 0.1, 2_000, &mut s).unwrap().pass
        })
        .count();
    assert!(passes >= 95, "{passes}/100");
}

#[test]
fn noise_penalty_pass_rate_report() {
    let seeds: Vec<u64> = (0..20).collect();
    let r = verify_noise_penalty_pass_rate(&[1.0, 2.0], &[1.0, 1.0], 0.0, 0.1, 1_000, &seeds, 18).unwrap();
    assert_eq!(r.samples, 20);
    assert_eq!(r.tolerance, 2.0);
    assert_eq!(r.pass, r.discrepancy <= 2.0);
    assert!(verify_noise_penalty_pass_rate(&[1.0], &[1.0], 0.0, 0.1, 1_000, &seeds, 21).is_err());
}

fn random_layer(s: &mut RandomStream) -> (Layer, Vec<f64>) {
    let out = 1 + s.below(4);
    let inp = 1 + s.below(4);
    let w = (0..out * inp).map(|_| s.standard_normal()).collect();
    let layer = Layer::new(Matrix::from_vec(out, inp, w).unwrap(), vec![0.0; out], Activation::Identity).unwrap();
    let y = (0..inp).map(|_| s.standard_normal()).collect();
    (layer, y)
}

#[test]
fn dropout_as_noise_examples() {
    let mut s = RandomStream::new(21);
    let (layer, y) = random_layer(&mut s);

    let r = verify_dropout_as_noise(&layer, &y, 1.0, 200, &mut s).unwrap();
    assert!(r.pass);
    assert!(r.discrepancy < 1e-12);
    assert_eq!(r.exact_failures, 0);

    let r = verify_dropout_as_noise(&layer, &y, 0.0, 200, &mut s).unwrap();
    assert!(r.pass);
    assert_eq!(r.discrepancy, 0.0);

    for _ in 0..5 {
        let (layer, y) = random_layer(&mut s);
        let r = verify_dropout_as_noise(&layer, &y, 0.5, 10_000, &mut s).unwrap();
        assert_eq!(r.exact_failures, 0);
        assert!(r.pass, "{r:?}");
        assert!(r.std_error.unwrap() > 0.0);
    }
}

/// Solves `a v = b` by Gauss-Jordan elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in 0..n {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    (0..n).map(|i| b[i] / a[i][i]).collect()
}

/// Minimizer of `mean (w·x + b - y)² + alpha (‖w‖² + b²)`, i.e.
/// `(XₐᵀXₐ + alpha n I)⁻¹ Xₐᵀ y` with a ones column appended.
fn ridge(rows: &[&Sample], alpha: f64) -> Vec<f64> {
    let d = rows[0].x.len() + 1;
    let n = rows.len() as f64;
    let mut a = vec![vec![0.0; d]; d];
    let mut b = vec![0.0; d];
    for r in rows {
        let xa: Vec<f64> = r.x.iter().copied().chain([1.0]).collect();
        for i in 0..d {
            b[i] += xa[i] * r.y[0];
            for j in 0..d {
                a[i][j] += xa[i] * xa[j];
            }
        }
    }
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += alpha * n;
    }
    solve(a, b)
}

fn linreg_setup() -> (Vec<Sample>, Network, TrainConfig) {
    let rows: Vec<Sample> = tasks::linreg2d_v1().train().into_iter().cloned().collect();
    let topo = [LayerSpec { width: 1, activation: Activation::Identity }];
    let init = init_network(2, &topo, 7).unwrap();
    (rows, init, TrainConfig::new(0.02, 400, 8, 7, Loss::Mse))
}

#[test]
fn l2_matches_noise_and_ridge() {
    let (rows, init, cfg) = linreg_setup();
    let (sigma, alpha) = (0.1, 0.01);
    let out = verify_l2_vs_noise_training(&rows, &init, sigma, alpha, &cfg, WEIGHT_TOLERANCE).unwrap();
    assert!(out.report.pass, "{:?}", out.report);

    let refs: Vec<&Sample> = rows.iter().collect();
    let oracle = ridge(&refs, sigma * sigma);
    assert!(oracle[2].abs() < 1e-12, "centred data gives zero bias");
    assert!(relative_max_diff(&out.penalized.flatten(), &oracle) < WEIGHT_TOLERANCE);
    assert!(relative_max_diff(&out.noised.flatten(), &oracle) < WEIGHT_TOLERANCE);
    // shrinkage is visible against the unpenalized fit
    let ols = ridge(&refs, 0.0);
    assert!(oracle[0].abs() < ols[0].abs() && oracle[1].abs() < ols[1].abs());
}

#[test]
fn l2_vs_noise_zero_is_identical() {
    let (rows, init, cfg) = linreg_setup();
    let out = verify_l2_vs_noise_training(&rows, &init, 0.0, 0.0, &cfg, WEIGHT_TOLERANCE).unwrap();
    assert_eq!(out.report.discrepancy, 0.0);
    assert_eq!(out.penalized, out.noised);
}

#[test]
fn l2_vs_noise_mismatch_fails() {
    let (rows, init, cfg) = linreg_setup();
    let (sigma, alpha) = (0.1, 0.1);
    let refs: Vec<&Sample> = rows.iter().collect();
    let displaced = relative_max_diff(&ridge(&refs, alpha), &ridge(&refs, sigma * sigma));
    assert!(displaced > WEIGHT_TOLERANCE, "{displaced}");
    let out = verify_l2_vs_noise_training(&rows, &init, sigma, alpha, &cfg, WEIGHT_TOLERANCE).unwrap();
    assert!(!out.report.pass, "{:?}", out.report);
}

fn cheap_feature_setup(stddev: f64) -> (tasks::HierTask, Vec<LayerSpec>, TrainConfig, Augmentation) {
    let task = tasks::hier_z4x16_v1();
    let topo = vec![
        LayerSpec { width: 8, activation: Activation::Tanh },
        LayerSpec { width: 1, activation: Activation::Identity },
    ];
    let base = TrainConfig::new(0.05, 20, 8, 0, Loss::Mse);
    let aug = Augmentation {
        spec: AugmentSpec {
            noise: NoiseSpec::additive(Dist::Gaussian { mean: 0.0, stddev }),
            target: Target::Feature,
            decoder: Some(task.decoder.clone()),
        },
        mode: AugmentMode::Fresh,
    };
    (task, topo, base, aug)
}

#[test]
fn zero_feature_noise_changes_nothing() {
    let (task, topo, base, aug) = cheap_feature_setup(0.0);
    let seeds: Vec<u64> = (1..=10).collect();
    let out = verify_feature_noise_regularizes(&task.domain, 32, &topo, &base, &aug, &seeds).unwrap();
    assert_eq!(out.baseline_gaps, out.augmented_gaps);
    assert_eq!(out.wins, 0);
    assert!(!out.report.pass);
}

#[test]
fn feature_noise_preconditions() {
    let (task, topo, base, aug) = cheap_feature_setup(0.05);
    let few: Vec<u64> = vec![1];
    assert!(verify_feature_noise_regularizes(&task.domain, 32, &topo, &base, &aug, &few).is_err());

    let seeds: Vec<u64> = (1..=10).collect();
    let flat: Vec<Sample> = task
        .domain
        .iter()
        .map(|s| Sample::with_features(s.x.clone(), s.z.clone().unwrap(), vec![0.25]))
        .collect();
    assert!(verify_feature_noise_regularizes(&flat, 32, &topo, &base, &aug, &seeds).is_err());
    assert!(verify_feature_noise_regularizes(&task.domain, 2048, &topo, &base, &aug, &seeds).is_err());
}

#[test]
fn preset_is_well_formed() {
    let task = tasks::hier_z4x16_v1();
    let p = task.feature_noise_preset();
    assert!(p.base.validate().is_ok());
    assert!(p.augmentation.spec.validate().is_ok());
    assert_eq!(p.seeds.len(), 10);
    assert_eq!(p.topology.last().unwrap().width, 1);
}

#[test]
fn report_pass_invariant() {
    for (d, t) in [(0.0, 0.0), (1.0, 0.5), (0.5, 1.0), (f64::NAN, 1.0), (f64::INFINITY, 1.0)] {
        let r = EquivalenceReport::new("x", d, t, 1);
        assert_eq!(r.pass, d <= t);
    }
}

#[test]
fn mask_count_small_sizes() {
    let r = verify_mask_count(4).unwrap();
    assert!(r.pass);
    assert_eq!(r.discrepancy, 0.0);
}
