//! Acceptance suite. Every criterion runs in sequence inside one test so the
//! runtime limits are measured without contention; each prints a line, and
//! the test fails at the end if any line says FAIL.

use std::fs;
use std::io::Write;
use std::time::{Duration, Instant};

use noisereg::run_cli;
use noisereg_core::data::Sample;
use noisereg_core::experiment::{
    claims, init_network, random_linear_layer, relative_max_diff, verify_noise_penalty_pass_rate,
    verify_dropconnect_reduction, verify_dropout_as_noise, verify_feature_noise_regularizes, verify_gradients,
    verify_l2_vs_noise_training, verify_mask_count, verify_memorizer_gap, verify_scheme_calibration,
    EquivalenceReport, TrainConfig, WEIGHT_TOLERANCE,
};
use noisereg_core::net::{Activation, LayerSpec, Loss};
use noisereg_core::numkit::RandomStream;
use noisereg_core::regularize::enumerate_neuron_masks;
use noisereg_core::tasks;

struct Outcome {
    pass: bool,
    detail: String,
}

fn from_reports(reports: &[EquivalenceReport]) -> Outcome {
    let detail = reports
        .iter()
        .map(|r| format!("{} {:.3e}/{:.3e}", r.claim, r.discrepancy, r.tolerance))
        .collect::<Vec<_>>()
        .join("; ");
    Outcome {
        pass: reports.iter().all(|r| r.pass),
        detail,
    }
}

fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
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

/// Minimizer of `mean (w·x + b - y)² + alpha (‖w‖² + b²)`.
fn ridge(rows: &[Sample], alpha: f64) -> Vec<f64> {
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

fn reduction() -> Outcome {
    let r = verify_dropconnect_reduction(100, &mut RandomStream::new(1)).unwrap();
    let mut o = from_reports(&[r.clone()]);
    o.pass &= r.discrepancy == 0.0 && r.exact_failures == 0;
    o
}

fn gradients() -> Outcome {
    let r = verify_gradients(50, &mut RandomStream::new(2)).unwrap();
    let mut o = from_reports(&[r.clone()]);
    o.pass &= r.tolerance <= 1e-5;
    o
}

fn noise_penalty() -> Outcome {
    let mut s = RandomStream::new(3);
    let seeds: Vec<u64> = (0..100).map(|_| s.next_u64()).collect();
    let reports: Vec<_> = [0.01, 0.1]
        .iter()
        .map(|&sigma| verify_noise_penalty_pass_rate(&[1.0, 2.0], &[1.0, 1.0], 0.0, sigma, 100_000, &seeds, 95).unwrap())
        .collect();
    from_reports(&reports)
}

fn ridge_equivalence() -> Outcome {
    let rows: Vec<Sample> = tasks::linreg2d_v1().train().into_iter().cloned().collect();
    let topo = [LayerSpec { width: 1, activation: Activation::Identity }];
    let init = init_network(2, &topo, 7).unwrap();
    let cfg = TrainConfig::new(0.02, 400, 8, 7, Loss::Mse);
    let sigma = 0.1;
    let out = verify_l2_vs_noise_training(&rows, &init, sigma, sigma * sigma, &cfg, WEIGHT_TOLERANCE).unwrap();
    let oracle = ridge(&rows, sigma * sigma);
    let to_penalized = relative_max_diff(&out.penalized.flatten(), &oracle);
    let to_noised = relative_max_diff(&out.noised.flatten(), &oracle);
    let between = out.report.discrepancy;
    Outcome {
        pass: to_penalized <= 0.05 && to_noised <= 0.05 && between <= 0.05,
        detail: format!("penalized-ridge {to_penalized:.3e}, noised-ridge {to_noised:.3e}, between {between:.3e}"),
    }
}

fn memorizer() -> Outcome {
    let domains: Vec<_> = tasks::enumerable_domains().into_iter().map(|(_, d)| d).collect();
    let r = verify_memorizer_gap(&domains, Loss::Mse).unwrap();
    let mut o = from_reports(&[r.clone()]);
    o.pass &= r.tolerance <= 1e-12 && !domains.is_empty();
    o
}

fn dropout_noise() -> Outcome {
    let root = RandomStream::new(6);
    let reports: Vec<_> = (0..3)
        .map(|k| {
            let mut s = root.split_index(k);
            let (layer, y) = random_linear_layer(4, &mut s).unwrap();
            verify_dropout_as_noise(&layer, &y, 0.5, 10_000, &mut s).unwrap()
        })
        .collect();
    let mut o = from_reports(&reports);
    o.pass &= reports.iter().all(|r| r.exact_failures == 0 && r.samples == 10_000);
    o
}

fn scheme() -> Outcome {
    let reports = verify_scheme_calibration(100, 200, &mut RandomStream::new(7)).unwrap();
    let mut o = from_reports(&reports);
    let find = |c: &str| reports.iter().find(|r| r.claim == c).unwrap().discrepancy;
    o.pass &= find(claims::SCHEME_IDENTITY) == 0.0
        && find(claims::SCHEME_MEAN_SHIFT) <= 1.0
        && find(claims::SCHEME_VARIANCE) <= 5.0;
    o
}

fn feature_noise() -> Outcome {
    let task = tasks::hier_z4x16_v1();
    let preset = task.feature_noise_preset();
    let out = verify_feature_noise_regularizes(
        &task.domain,
        tasks::HIER_TRAIN_SIZE,
        &preset.topology,
        &preset.base,
        &preset.augmentation,
        &preset.seeds,
    )
    .unwrap();
    let margins: Vec<String> = out
        .baseline_gaps
        .iter()
        .zip(&out.augmented_gaps)
        .map(|(b, a)| format!("{:.2e}", b - a))
        .collect();
    Outcome {
        pass: preset.seeds.len() == 10
            && out.mean_augmented_gap < out.mean_baseline_gap
            && out.wins >= 8,
        detail: format!(
            "mean gap {:.4e} -> {:.4e}, wins {}/10, margins [{}]",
            out.mean_baseline_gap,
            out.mean_augmented_gap,
            out.wins,
            margins.join(", ")
        ),
    }
}

fn cli(args: &[&str]) -> (i32, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["noisereg"];
    full.extend_from_slice(args);
    (run_cli(full, &mut out, &mut err), out)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.json");
    fs::write(
        &train,
        r#"{
  "schema_version": 1,
  "task": { "builtin": "blobs2-v1" },
  "topology": [{ "width": 8, "activation": "relu" }, { "width": 1, "activation": "sigmoid" }],
  "train": { "epochs": 30, "loss": "bce", "seed": 11,
             "drop": { "p": 0.8, "granularity": "weight", "layer": 1 } }
}"#,
    )
    .unwrap();
    let verify = dir.path().join("verify.json");
    fs::write(
        &verify,
        r#"{
  "schema_version": 1,
  "task": { "builtin": "linreg2d-v1" },
  "topology": [{ "width": 1, "activation": "identity" }],
  "train": { "eta": 0.02, "epochs": 400, "seed": 7 },
  "verify": {
    "dropconnect_reduction": {}, "gradients": { "nets": 5 },
    "noise_penalty": { "n_mc": 1000, "seeds": 10, "min_pass": 5 },
    "l2_vs_noise": {}, "memorizer_gap": {}, "dropout_as_noise": { "trials": 1000 },
    "scheme_calibration": { "trials": 5 }, "mask_count": {}
  }
}"#,
    )
    .unwrap();
    let mut same = true;
    let mut detail = Vec::new();
    for (cmd, path) in [("train", &train), ("verify", &verify)] {
        for format in ["json", "csv"] {
            let args = ["--config", path.to_str().unwrap(), "--format", format];
            let (c1, a) = cli(&[&[cmd][..], &args].concat());
            let (c2, b) = cli(&[&[cmd][..], &args].concat());
            let ok = c1 == 0 && c2 == 0 && a == b && !a.is_empty();
            detail.push(format!("{cmd}/{format} {} bytes {}", a.len(), if ok { "identical" } else { "differ" }));
            same &= ok;
        }
    }
    Outcome {
        pass: same,
        detail: detail.join(", "),
    }
}

fn mask_count() -> Outcome {
    let r = verify_mask_count(4).unwrap();
    let mut o = from_reports(&[r.clone()]);
    for n in 0..=4u32 {
        let mut patterns: Vec<Vec<bool>> = enumerate_neuron_masks(n)
            .unwrap()
            .iter()
            .map(|m| m.as_slice().iter().map(|&v| v == 1.0).collect())
            .collect();
        let well_formed = patterns.iter().all(|p| p.len() == n as usize);
        patterns.sort_unstable();
        patterns.dedup();
        o.pass &= well_formed && patterns.len() == 1usize << n;
    }
    o
}

#[test]
fn acceptance() {
    let criteria: [(&str, Duration, fn() -> Outcome); 10] = [
        ("1 dropout is a diagonal dropconnect mask", Duration::from_secs(1), reduction),
        ("2 backward matches central differences", Duration::from_secs(10), gradients),
        ("3 input noise equals the weight penalty", Duration::from_secs(30), noise_penalty),
        ("4 noise training matches ridge", Duration::from_secs(60), ridge_equivalence),
        ("5 memorizer gap is the domain loss", Duration::from_secs(1), memorizer),
        ("6 dropout is multiplicative noise", Duration::from_secs(5), dropout_noise),
        ("7 scheme check calibration", Duration::from_secs(30), scheme),
        ("8 feature noise shrinks the gap", Duration::from_secs(600), feature_noise),
        ("9 reports are byte-identical", Duration::from_secs(60), determinism),
        ("10 mask count is 2^n", Duration::from_secs(1), mask_count),
    ];
    let mut failed = Vec::new();
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let o = check();
        let took = start.elapsed();
        let pass = o.pass && took <= limit;
        let _ = writeln!(
            std::io::stdout().lock(),
            "{} criterion {name}: {} ({:.3}s, limit {}s)",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64(),
            limit.as_secs()
        );
        if !pass {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
