//! Subcommand implementations. Each returns a report value; writing it out
//! and choosing the exit status is left to the caller.

use std::path::{Path, PathBuf};

use noisereg_core::augment::{generate_batch, Decoder, Target};
use noisereg_core::data::{Dataset, Sample};
use noisereg_core::experiment::{
    claims, gap_estimate, gap_exact, init_network, random_linear_layer, train, verify_noise_penalty_pass_rate,
    verify_dropconnect_reduction, verify_dropout_as_noise, verify_feature_noise_regularizes, verify_gradients,
    verify_l2_vs_noise_training, verify_mask_count, verify_memorizer_gap, verify_scheme_calibration, AugmentMode,
    Augmentation, TrainOutcome,
};
use noisereg_core::numkit::RandomStream;
use noisereg_core::tasks::{self, HierTask};
use rayon::prelude::*;
use serde_json::Value;

use crate::config::{parse_config_value, ConfigErrors, ConfigIssue, ExperimentConfig, TaskSource};
use crate::dataset::{augmented_to_csv, load_dataset_csv};
use crate::error::{CliError, Result};
use crate::report::{Command, FeatureNoiseDetail, RunReport, SweepReport};

/// A task's data together with what the builtin generator knows about it.
pub struct ResolvedTask {
    pub data: Dataset,
    pub decoder: Option<Decoder>,
    pub hier: Option<HierTask>,
}

fn config_error(path: &str, message: impl Into<String>) -> CliError {
    CliError::Config(ConfigErrors(vec![ConfigIssue {
        path: path.to_string(),
        message: message.into(),
    }]))
}

pub fn resolve_task(config: &ExperimentConfig, base_dir: &Path) -> Result<ResolvedTask> {
    match &config.task {
        TaskSource::Builtin(name) if name == tasks::HIER_Z4X16_V1 => {
            let hier = tasks::hier_z4x16_v1();
            Ok(ResolvedTask {
                data: hier.dataset(),
                decoder: Some(hier.decoder.clone()),
                hier: Some(hier),
            })
        }
        TaskSource::Builtin(name) => Ok(ResolvedTask {
            data: tasks::builtin(name).ok_or_else(|| config_error("task.builtin", format!("unknown task '{name}'")))?,
            decoder: tasks::builtin_decoder(name),
            hier: None,
        }),
        TaskSource::Csv(path) => Ok(ResolvedTask {
            data: load_dataset_csv(&base_dir.join(path))?,
            decoder: None,
            hier: None,
        }),
    }
}

/// The config's augmentation, with a feature target's decoder taken from the
/// builtin task when the config leaves it out.
pub fn resolved_augmentation(config: &ExperimentConfig, task: &ResolvedTask) -> Option<Augmentation> {
    let mut a = config.augmentation.clone()?;
    if a.spec.target == Target::Feature && a.spec.decoder.is_none() {
        a.spec.decoder = task.decoder.clone();
    }
    Some(a)
}

fn required_split<'a>(rows: Vec<&'a Sample>, name: &str) -> Result<Vec<&'a Sample>> {
    if rows.is_empty() {
        Err(CliError::MissingSplit(name.to_string()))
    } else {
        Ok(rows)
    }
}

fn input_dim(data: &Dataset) -> usize {
    data.x_dim().unwrap_or(0)
}

fn fit(config: &ExperimentConfig, task: &ResolvedTask) -> Result<TrainOutcome> {
    let rows = required_split(task.data.train(), "train")?;
    let init = init_network(input_dim(&task.data), &config.topology, config.train.seed)?;
    let cfg = config.train.to_train_config(resolved_augmentation(config, task));
    Ok(train(&cfg, init, &rows)?)
}

fn run_id(command: Command, seed: u64) -> String {
    format!("{}-s{seed}", command.name())
}

pub fn run_train(config: &ExperimentConfig, base_dir: &Path) -> Result<RunReport> {
    let task = resolve_task(config, base_dir)?;
    let out = fit(config, &task)?;
    let mut report = RunReport::new(Command::Train, run_id(Command::Train, config.train.seed), config.clone());
    report.epoch_losses = out.epoch_losses;
    report.params = Some(out.params);
    Ok(report)
}

/// Trains, then reports the validation gap estimate and, when the dataset
/// carries a full domain, the exact gap.
pub fn run_gap(config: &ExperimentConfig, base_dir: &Path) -> Result<RunReport> {
    let task = resolve_task(config, base_dir)?;
    required_split(task.data.val(), "val")?;
    let out = fit(config, &task)?;
    let mut report = RunReport::new(Command::Gap, run_id(Command::Gap, config.train.seed), config.clone());
    report.gaps.push(gap_estimate(&out.params, &task.data, config.train.loss)?);
    if task.data.has_domain() {
        report.gaps.push(gap_exact(&out.params, &task.data, config.train.loss)?);
    }
    report.epoch_losses = out.epoch_losses;
    report.params = Some(out.params);
    Ok(report)
}

/// Runs every selected verification. Each claim draws from its own stream
/// split off the config seed.
pub fn run_verify(config: &ExperimentConfig, base_dir: &Path) -> Result<RunReport> {
    let seed = config.train.seed;
    let stream = |claim: &str| RandomStream::new(seed).split(claim);
    let v = &config.verify;
    let mut report = RunReport::new(Command::Verify, run_id(Command::Verify, seed), config.clone());
    let needs_task = v.l2_vs_noise.is_some() || v.feature_noise.is_some();
    let task = if needs_task { Some(resolve_task(config, base_dir)?) } else { None };

    if let Some(s) = &v.dropconnect_reduction {
        let r = verify_dropconnect_reduction(s.cases, &mut stream(claims::DROPCONNECT_REDUCTION))?;
        report.equivalences.push(r);
    }
    if let Some(s) = &v.gradients {
        report.equivalences.push(verify_gradients(s.nets, &mut stream(claims::GRADIENT_CHECK))?);
    }
    if let Some(s) = &v.noise_penalty {
        let mut seeds_stream = stream(claims::NOISE_PENALTY);
        let seeds: Vec<u64> = (0..s.seeds).map(|_| seeds_stream.next_u64()).collect();
        for &sigma in &s.sigmas {
            let r = verify_noise_penalty_pass_rate(&s.w, &s.x, s.t, sigma, s.n_mc, &seeds, s.min_pass)?;
            report.equivalences.push(r);
        }
    }
    if let (Some(s), Some(task)) = (&v.l2_vs_noise, &task) {
        let rows = required_split(task.data.train(), "train")?;
        let init = init_network(input_dim(&task.data), &config.topology, seed)?;
        let base = config.train.to_train_config(None);
        let alpha = s.alpha.unwrap_or(s.sigma * s.sigma);
        let out = verify_l2_vs_noise_training(&rows, &init, s.sigma, alpha, &base, s.tolerance)?;
        report.equivalences.push(out.report);
    }
    if let Some(s) = &v.memorizer_gap {
        let domains: Vec<Dataset> = tasks::enumerable_domains().into_iter().map(|(_, d)| d).collect();
        report.equivalences.push(verify_memorizer_gap(&domains, s.loss)?);
    }
    if let Some(s) = &v.dropout_as_noise {
        let root = stream(claims::DROPOUT_AS_NOISE);
        for k in 0..s.layers {
            let mut st = root.split_index(k as u64);
            let (layer, y) = random_linear_layer(4, &mut st)?;
            report.equivalences.push(verify_dropout_as_noise(&layer, &y, s.p, s.trials, &mut st)?);
        }
    }
    if let Some(s) = &v.scheme_calibration {
        let reports = verify_scheme_calibration(s.trials, s.samples, &mut stream(claims::SCHEME_IDENTITY))?;
        report.equivalences.extend(reports);
    }
    if let (Some(s), Some(task)) = (&v.feature_noise, &task) {
        let domain: Vec<Sample> = match &task.hier {
            Some(h) => h.domain.clone(),
            None => task.data.rows().iter().map(|(_, s)| s.clone()).collect(),
        };
        let aug = resolved_augmentation(config, task)
            .ok_or_else(|| config_error("augmentation", "required by verify.feature_noise"))?;
        let base = config.train.to_train_config(None);
        let out = verify_feature_noise_regularizes(&domain, s.train_size, &config.topology, &base, &aug, &s.seeds)?;
        report.feature_noise = Some(FeatureNoiseDetail::from(&out));
        report.equivalences.push(out.report);
    }
    if let Some(s) = &v.mask_count {
        report.equivalences.push(verify_mask_count(s.max_units)?);
    }
    Ok(report)
}

/// Augmented copies of the train split as CSV: one per train row for fresh
/// noise, `copies` per row for a frozen set.
pub fn run_augment(config: &ExperimentConfig, base_dir: &Path) -> Result<String> {
    let task = resolve_task(config, base_dir)?;
    let aug = resolved_augmentation(config, &task)
        .ok_or_else(|| config_error("augmentation", "required by the augment command"))?;
    let mut origin_rows = Vec::new();
    let mut rows = Vec::new();
    for (i, (split, s)) in task.data.rows().iter().enumerate() {
        if *split == noisereg_core::data::Split::Train {
            origin_rows.push(i);
            rows.push(s);
        }
    }
    let rows = required_split(rows, "train")?;
    let copies = match aug.mode {
        AugmentMode::Fresh => 1,
        AugmentMode::Frozen { copies } => copies,
    };
    let mut s = RandomStream::new(config.train.seed).split("augment");
    let batch = generate_batch(&rows, &aug.spec, copies * rows.len(), &mut s)?;
    Ok(augmented_to_csv(&task.data, &origin_rows, &batch))
}

/// Config for every grid point, in row-major order over the axes.
pub fn grid_points(config: &ExperimentConfig) -> Result<Vec<ExperimentConfig>> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| config_error("sweep", "required by the sweep command"))?;
    let base = serde_json::to_value(config).expect("configs always serialize");
    let mut docs = vec![base];
    for axis in &sweep.grid {
        let mut next = Vec::with_capacity(docs.len() * axis.values.len());
        for doc in &docs {
            for value in &axis.values {
                let mut d: Value = doc.clone();
                crate::config::set_path(&mut d, &axis.path, value.clone())?;
                next.push(d);
            }
        }
        docs = next;
    }
    docs.iter().map(|d| parse_config_value(d).map_err(CliError::from)).collect()
}

fn sweep_job(config: &ExperimentConfig, base_dir: &Path, point: usize) -> Result<RunReport> {
    let task = resolve_task(config, base_dir)?;
    let out = fit(config, &task)?;
    let seed = config.train.seed;
    let mut report = RunReport::new(Command::Sweep, format!("p{point}-s{seed}"), config.clone());
    if !task.data.val().is_empty() {
        report.gaps.push(gap_estimate(&out.params, &task.data, config.train.loss)?);
    }
    if task.data.has_domain() {
        report.gaps.push(gap_exact(&out.params, &task.data, config.train.loss)?);
    }
    report.epoch_losses = out.epoch_losses;
    Ok(report)
}

/// Trains every (grid point, seed) pair on up to `jobs` threads. Groups come
/// back ordered by point, then by the order of `sweep.seeds`.
pub fn run_sweep(config: &ExperimentConfig, base_dir: &Path, jobs: usize) -> Result<SweepReport> {
    let points = grid_points(config)?;
    let seeds = config.sweep.as_ref().map(|s| s.seeds.clone()).unwrap_or_default();
    let mut work = Vec::with_capacity(points.len() * seeds.len());
    for (p, point) in points.iter().enumerate() {
        for &seed in &seeds {
            let mut c = point.clone();
            c.train.seed = seed;
            work.push((p, c));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool");
    let base_dir: PathBuf = base_dir.to_path_buf();
    let groups: Vec<Result<RunReport>> =
        pool.install(|| work.par_iter().map(|(p, c)| sweep_job(c, &base_dir, *p)).collect());
    Ok(SweepReport::new(groups.into_iter().collect::<Result<_>>()?))
}
