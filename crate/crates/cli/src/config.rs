//! Experiment configuration: JSON, validated against an embedded schema and
//! then checked semantically. Every problem found is reported with the path
//! of the offending key.

use std::fmt;
use std::sync::OnceLock;

use noisereg_core::augment::Target;
use noisereg_core::experiment::{Augmentation, MaskGranularity, Sampling, TrainConfig};
use noisereg_core::net::{LayerSpec, Loss};
use noisereg_core::regularize::{DropSpec, Penalty, ScaleMode};
use noisereg_core::tasks;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Current config and report schema version.
pub const SCHEMA_VERSION: u32 = 1;

/// JSON Schema for [`ExperimentConfig`].
pub const CONFIG_SCHEMA: &str = include_str!("../schema/config.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub task: TaskSource,
    pub topology: Vec<LayerSpec>,
    pub train: TrainSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub augmentation: Option<Augmentation>,
    #[serde(default, skip_serializing_if = "VerifySection::is_empty")]
    pub verify: VerifySection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    /// Report path; `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskSource {
    Builtin(String),
    /// Relative paths resolve against the config file's directory.
    Csv(String),
}

fn default_eta() -> f64 {
    0.05
}

fn default_batch_size() -> usize {
    8
}

fn default_loss() -> Loss {
    Loss::Mse
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    #[serde(default = "default_eta")]
    pub eta: f64,
    pub epochs: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_loss")]
    pub loss: Loss,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<Penalty>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drop: Option<DropSpec>,
    #[serde(default)]
    pub mask_granularity: MaskGranularity,
    #[serde(default)]
    pub scale_mode: ScaleMode,
    #[serde(default)]
    pub sampling: Sampling,
}

impl TrainSection {
    pub fn to_train_config(&self, augmentation: Option<Augmentation>) -> TrainConfig {
        let mut c = TrainConfig::new(self.eta, self.epochs, self.batch_size, self.seed, self.loss);
        c.penalty = self.penalty;
        c.drop = self.drop;
        c.augmentation = augmentation;
        c.mask_granularity = self.mask_granularity;
        c.scale_mode = self.scale_mode;
        c.sampling = self.sampling;
        c
    }
}

macro_rules! selection {
    ($(#[$doc:meta])* $name:ident { $($field:ident : $ty:ty = $default:expr),* $(,)? }) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(default, deny_unknown_fields)]
        pub struct $name {
            $(pub $field: $ty),*
        }

        impl Default for $name {
            fn default() -> Self {
                $name { $($field: $default),* }
            }
        }
    };
}

selection!(DropconnectSelection { cases: usize = 100 });
selection!(GradientSelection { nets: usize = 50 });
selection!(
    /// Pass rate of the Monte-Carlo noise/penalty identity, once per sigma.
    NoisePenaltySelection {
        w: Vec<f64> = vec![1.0, 2.0],
        x: Vec<f64> = vec![1.0, 1.0],
        t: f64 = 0.0,
        sigmas: Vec<f64> = vec![0.01, 0.1],
        n_mc: usize = 100_000,
        seeds: usize = 100,
        min_pass: usize = 95,
    }
);
selection!(
    /// Uses the config's task, topology and train section. `alpha` defaults
    /// to `sigma²`.
    L2NoiseSelection {
        sigma: f64 = 0.1,
        alpha: Option<f64> = None,
        tolerance: f64 = noisereg_core::experiment::WEIGHT_TOLERANCE,
    }
);
selection!(MemorizerSelection { loss: Loss = Loss::Mse });
selection!(DropoutSelection { p: f64 = 0.5, trials: usize = 10_000, layers: usize = 1 });
selection!(SchemeSelection { trials: usize = 100, samples: usize = 200 });
selection!(
    /// Uses the config's task domain, topology, train section and
    /// augmentation.
    FeatureNoiseSelection {
        seeds: Vec<u64> = (1..=10).collect(),
        train_size: usize = tasks::HIER_TRAIN_SIZE,
    }
);
selection!(MaskCountSelection { max_units: u32 = 4 });

/// Verifications to run; absent entries are skipped.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dropconnect_reduction: Option<DropconnectSelection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradients: Option<GradientSelection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_penalty: Option<NoisePenaltySelection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l2_vs_noise: Option<L2NoiseSelection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memorizer_gap: Option<MemorizerSelection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dropout_as_noise: Option<DropoutSelection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme_calibration: Option<SchemeSelection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_noise: Option<FeatureNoiseSelection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_count: Option<MaskCountSelection>,
}

impl VerifySection {
    pub fn is_empty(&self) -> bool {
        *self == VerifySection::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<GridAxis>,
}

/// One swept key (dotted path into the config) and its values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    pub path: String,
    pub values: Vec<Value>,
}

/// One validation failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    /// Dotted key path, empty for the document root.
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "<root>: {}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

/// Every problem found in a config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl ConfigErrors {
    fn single(path: &str, message: impl Into<String>) -> Self {
        ConfigErrors(vec![ConfigIssue {
            path: path.to_string(),
            message: message.into(),
        }])
    }

    pub fn mentions(&self, path: &str) -> bool {
        self.0.iter().any(|i| i.path == path || i.message.contains(path))
    }
}

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  {issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

fn validator() -> &'static jsonschema::Validator {
    static V: OnceLock<jsonschema::Validator> = OnceLock::new();
    V.get_or_init(|| {
        let schema: Value = serde_json::from_str(CONFIG_SCHEMA).expect("embedded schema is valid JSON");
        jsonschema::validator_for(&schema).expect("embedded schema compiles")
    })
}

fn dotted(pointer: &str) -> String {
    pointer
        .trim_start_matches('/')
        .split('/')
        .filter(|s| !s.is_empty())
        .map(|s| s.replace("~1", "/").replace("~0", "~"))
        .collect::<Vec<_>>()
        .join(".")
}

/// Parses and validates a JSON config, filling documented defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| ConfigErrors::single("", format!("not valid JSON: {e}")))?;
    parse_config_value(&value)
}

pub fn parse_config_value(value: &Value) -> Result<ExperimentConfig, ConfigErrors> {
    let mut issues: Vec<ConfigIssue> = validator()
        .iter_errors(value)
        .map(|e| ConfigIssue {
            path: dotted(e.instance_path().as_str()),
            message: e.to_string(),
        })
        .collect();
    if !issues.is_empty() {
        issues.sort_by(|a, b| a.path.cmp(&b.path).then_with(|| a.message.cmp(&b.message)));
        issues.dedup();
        return Err(ConfigErrors(issues));
    }
    let config: ExperimentConfig = serde_json::from_value(value.clone())
        .map_err(|e| ConfigErrors::single("", e.to_string()))?;
    let issues = semantic_issues(&config);
    if issues.is_empty() {
        Ok(config)
    } else {
        Err(ConfigErrors(issues))
    }
}

fn semantic_issues(c: &ExperimentConfig) -> Vec<ConfigIssue> {
    let mut out = Vec::new();
    let mut push = |path: &str, message: String| {
        out.push(ConfigIssue {
            path: path.to_string(),
            message,
        })
    };

    if let Some(d) = &c.train.drop {
        if d.layer >= c.topology.len() {
            push(
                "train.drop.layer",
                format!("layer {} does not exist in a {}-layer topology", d.layer, c.topology.len()),
            );
        }
    }
    if let Some(a) = &c.augmentation {
        if let Err(e) = a.spec.noise.dist.validate() {
            push("augmentation.spec.noise.dist", e.to_string());
        }
        if let Some(d) = &a.spec.decoder {
            if let Err(e) = d.validate() {
                push("augmentation.spec.decoder", e.to_string());
            }
        }
        if a.spec.target == Target::Feature && a.spec.decoder.is_none() {
            let builtin_decoder = match &c.task {
                TaskSource::Builtin(name) => tasks::builtin_decoder(name).is_some(),
                TaskSource::Csv(_) => false,
            };
            if !builtin_decoder {
                push(
                    "augmentation.spec.decoder",
                    "feature-space noise needs a decoder for this task".to_string(),
                );
            }
        }
    }

    let v = &c.verify;
    if let Some(b) = &v.noise_penalty {
        if b.w.len() != b.x.len() {
            push("verify.noise_penalty.x", format!("length {} differs from w ({})", b.x.len(), b.w.len()));
        }
        if b.min_pass > b.seeds {
            push("verify.noise_penalty.min_pass", format!("exceeds seeds ({})", b.seeds));
        }
    }
    if let Some(f) = &v.feature_noise {
        if c.augmentation.is_none() {
            push("augmentation", "required by verify.feature_noise".to_string());
        }
        let mut seeds = f.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != f.seeds.len() {
            push("verify.feature_noise.seeds", "seeds must be distinct".to_string());
        }
    }
    if let Some(s) = &c.sweep {
        for (i, axis) in s.grid.iter().enumerate() {
            if axis.path == "schema_version" || axis.path.starts_with("sweep") {
                push(&format!("sweep.grid.{i}.path"), format!("'{}' cannot be swept", axis.path));
            }
        }
    }
    out
}

/// Serializes a config with 17 significant digits per number.
pub fn emit_config(config: &ExperimentConfig) -> String {
    crate::format::to_json(config).expect("configs always serialize")
}

/// Sets `value` at a dotted `path` inside a config document, creating
/// intermediate objects.
pub fn set_path(doc: &mut Value, path: &str, value: Value) -> Result<(), ConfigErrors> {
    let mut cur = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert((*part).to_string(), value);
                    return Ok(());
                }
                map.entry((*part).to_string())
                    .or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| ConfigErrors::single(path, format!("'{part}' is not an array index")))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| ConfigErrors::single(path, format!("index {idx} out of range ({len})")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(ConfigErrors::single(path, format!("'{part}' is not inside an object"))),
        };
    }
    Err(ConfigErrors::single(path, "empty path"))
}
