//! Command-line front end: JSON configs, CSV datasets, and JSON / CSV
//! reports for the experiments in `noisereg-core`.

pub mod config;
pub mod dataset;
pub mod error;
pub mod format;
pub mod report;
pub mod run;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

pub use config::{parse_config, ExperimentConfig};
pub use error::{CliError, Result};
pub use report::{Format, Report, RunReport, SweepReport};

use crate::report::Command;

#[derive(Debug, Parser)]
#[command(name = "noisereg", version, about = "Train, measure and verify noise-based regularization")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Train a network and report the loss trajectory and parameters.
    Train(Flags),
    /// Train, then report the generalization gap.
    Gap(Flags),
    /// Write augmented copies of the train split as CSV.
    Augment(Flags),
    /// Run the verifications selected in the config.
    Verify(Flags),
    /// Train across the config's seeds and grid.
    Sweep(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides `train.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Report path; defaults to the config's `output`, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for `sweep`.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Record wall-clock time in the report.
    #[arg(long)]
    timing: bool,
}

/// Reads and parses a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(parse_config(&text)?)
}

fn write_output(target: Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match target {
        Some(path) => fs::write(&path, text).map_err(|e| CliError::io(path, e)),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn execute(command: Command, flags: &Flags, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<bool> {
    let mut config = load_config(&flags.config)?;
    if let Some(seed) = flags.seed {
        config.train.seed = seed;
    }
    if let Some(a) = &config.augmentation {
        for w in a.spec.noise.warnings() {
            let _ = writeln!(stderr, "warning: {w:?}");
        }
    }
    let base_dir = flags.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let target = flags.out.clone().or_else(|| config.output.as_ref().map(|o| base_dir.join(o)));

    let start = Instant::now();
    let mut report = match command {
        Command::Train => Report::Run(run::run_train(&config, &base_dir)?),
        Command::Gap => Report::Run(run::run_gap(&config, &base_dir)?),
        Command::Verify => Report::Run(run::run_verify(&config, &base_dir)?),
        Command::Sweep => Report::Sweep(run::run_sweep(&config, &base_dir, flags.jobs)?),
        Command::Augment => {
            let csv = run::run_augment(&config, &base_dir)?;
            write_output(target, &csv, stdout)?;
            return Ok(true);
        }
    };
    if flags.timing {
        report.set_wall_clock(start.elapsed().as_secs_f64());
    }
    write_output(target, &report.emit(flags.format), stdout)?;
    if command == Command::Verify {
        if let Report::Run(r) = &report {
            for e in &r.equivalences {
                let verdict = if e.pass { "pass" } else { "FAIL" };
                let _ = writeln!(
                    stderr,
                    "{verdict} {}: discrepancy {} tolerance {}",
                    e.claim, e.discrepancy, e.tolerance
                );
            }
        }
    }
    Ok(report.all_pass())
}

/// Parses `args` (including the program name), runs the subcommand, and
/// returns the process exit status: 0 when every selected verification
/// passed, 1 when one failed or training diverged, 2 for config and input
/// errors, 3 for I/O errors.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
            } else {
                let _ = write!(stdout, "{text}");
            }
            return e.exit_code();
        }
    };
    let (command, flags) = match &cli.command {
        Sub::Train(f) => (Command::Train, f),
        Sub::Gap(f) => (Command::Gap, f),
        Sub::Augment(f) => (Command::Augment, f),
        Sub::Verify(f) => (Command::Verify, f),
        Sub::Sweep(f) => (Command::Sweep, f),
    };
    match execute(command, flags, stdout, stderr) {
        Ok(true) => 0,
        Ok(false) => error::EXIT_VERIFICATION_FAILED,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
