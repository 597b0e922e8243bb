//! Run reports and their JSON / CSV renderings.

use noisereg_core::experiment::{EquivalenceReport, FeatureNoiseOutcome, GapEstimator, GapReport};
use noisereg_core::net::Network;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, SCHEMA_VERSION};
use crate::format::{format_f64, to_json};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Stable CSV columns.
pub const CSV_COLUMNS: [&str; 5] = ["run_id", "seed", "metric", "step", "value"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Train,
    Gap,
    Augment,
    Verify,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Train => "train",
            Command::Gap => "gap",
            Command::Augment => "augment",
            Command::Verify => "verify",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Per-seed gaps behind a feature-noise verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureNoiseDetail {
    pub seeds: Vec<u64>,
    pub baseline_gaps: Vec<f64>,
    pub augmented_gaps: Vec<f64>,
    pub mean_baseline_gap: f64,
    pub mean_augmented_gap: f64,
    pub wins: usize,
}

impl From<&FeatureNoiseOutcome> for FeatureNoiseDetail {
    fn from(o: &FeatureNoiseOutcome) -> Self {
        FeatureNoiseDetail {
            seeds: o.seeds.clone(),
            baseline_gaps: o.baseline_gaps.clone(),
            augmented_gaps: o.augmented_gaps.clone(),
            mean_baseline_gap: o.mean_baseline_gap,
            mean_augmented_gap: o.mean_augmented_gap,
            wins: o.wins,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub schema_version: u32,
    pub artifact_version: String,
    pub command: Command,
    pub run_id: String,
    pub seed: u64,
    /// The config as run, defaults filled in.
    pub config: ExperimentConfig,
    pub epoch_losses: Vec<f64>,
    pub gaps: Vec<GapReport>,
    pub equivalences: Vec<EquivalenceReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Network>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_noise: Option<FeatureNoiseDetail>,
    /// Only with `--timing`; left out by default so reruns are byte-identical.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

impl RunReport {
    pub fn new(command: Command, run_id: String, config: ExperimentConfig) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            artifact_version: ARTIFACT_VERSION.to_string(),
            command,
            run_id,
            seed: config.train.seed,
            config,
            epoch_losses: Vec::new(),
            gaps: Vec::new(),
            equivalences: Vec::new(),
            params: None,
            feature_noise: None,
            wall_clock_seconds: None,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.equivalences.iter().all(|e| e.pass)
    }

    fn csv_rows(&self, out: &mut Vec<[String; 5]>) {
        let mut row = |seed: u64, metric: String, step: String, value: f64| {
            out.push([self.run_id.clone(), seed.to_string(), metric, step, format_f64(value)]);
        };
        for (epoch, &loss) in self.epoch_losses.iter().enumerate() {
            row(self.seed, "epoch_loss".into(), epoch.to_string(), loss);
        }
        for g in &self.gaps {
            let prefix = match g.estimator {
                GapEstimator::Exact => "exact",
                GapEstimator::Validation => "validation",
            };
            row(self.seed, format!("{prefix}.train_loss"), String::new(), g.train_loss);
            row(self.seed, format!("{prefix}.eval_loss"), String::new(), g.eval_loss);
            row(self.seed, format!("{prefix}.gap"), String::new(), g.gap);
        }
        let mut seen: Vec<&str> = Vec::new();
        for e in &self.equivalences {
            let step = seen.iter().filter(|c| **c == e.claim).count();
            seen.push(&e.claim);
            let step = step.to_string();
            row(self.seed, format!("{}.discrepancy", e.claim), step.clone(), e.discrepancy);
            row(self.seed, format!("{}.tolerance", e.claim), step.clone(), e.tolerance);
            row(self.seed, format!("{}.pass", e.claim), step, if e.pass { 1.0 } else { 0.0 });
        }
        if let Some(f) = &self.feature_noise {
            for ((&seed, &b), &a) in f.seeds.iter().zip(&f.baseline_gaps).zip(&f.augmented_gaps) {
                row(seed, "feature_noise.baseline_gap".into(), String::new(), b);
                row(seed, "feature_noise.augmented_gap".into(), String::new(), a);
            }
        }
        if let Some(t) = self.wall_clock_seconds {
            row(self.seed, "wall_clock_seconds".into(), String::new(), t);
        }
    }
}

/// Reports of a sweep, one group per (grid point, seed) in a fixed order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepReport {
    pub schema_version: u32,
    pub artifact_version: String,
    pub groups: Vec<RunReport>,
}

impl SweepReport {
    pub fn new(groups: Vec<RunReport>) -> Self {
        SweepReport {
            schema_version: SCHEMA_VERSION,
            artifact_version: ARTIFACT_VERSION.to_string(),
            groups,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Run(RunReport),
    Sweep(SweepReport),
}

impl Report {
    pub fn all_pass(&self) -> bool {
        match self {
            Report::Run(r) => r.all_pass(),
            Report::Sweep(s) => s.groups.iter().all(RunReport::all_pass),
        }
    }

    pub fn set_wall_clock(&mut self, seconds: f64) {
        match self {
            Report::Run(r) => r.wall_clock_seconds = Some(seconds),
            Report::Sweep(s) => s.groups.iter_mut().for_each(|g| g.wall_clock_seconds = Some(seconds)),
        }
    }

    pub fn emit(&self, format: Format) -> String {
        match format {
            Format::Json => match self {
                Report::Run(r) => to_json(r),
                Report::Sweep(s) => to_json(s),
            }
            .expect("reports always serialize"),
            Format::Csv => {
                let mut rows = Vec::new();
                match self {
                    Report::Run(r) => r.csv_rows(&mut rows),
                    Report::Sweep(s) => s.groups.iter().for_each(|g| g.csv_rows(&mut rows)),
                }
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(CSV_COLUMNS).expect("in-memory write");
                for r in rows {
                    w.write_record(&r).expect("in-memory write");
                }
                String::from_utf8(w.into_inner().expect("in-memory write")).expect("csv output is UTF-8")
            }
        }
    }
}
