//! Command implementations behind the `fracobs` binary.

pub mod config;
pub mod output;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fracobs_core::harness::{compare_observers, ObserverRun};
use fracobs_core::validate::{run_checks, tolerance_listing};
use fracobs_core::{run_experiment, ExperimentConfig};

use output::Manifest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_CONFIG
    }
}

impl From<fracobs_core::Error> for CliError {
    fn from(e: fracobs_core::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// What a command produced, for the caller to report.
#[derive(Debug)]
pub struct Outcome {
    pub exit: i32,
    pub stdout: String,
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_run(dir: &Path, stem: &str, run: &ObserverRun<f64>, stride: usize) -> Result<Vec<PathBuf>, CliError> {
    let trace = dir.join(format!("{stem}trace.csv"));
    let file = File::create(&trace).map_err(|e| CliError::Io(format!("{}: {e}", trace.display())))?;
    output::write_trace(BufWriter::new(file), run, stride)?;
    let text = dir.join(format!("{stem}metrics.txt"));
    write_file(&text, &output::metrics_text(&run.report))?;
    let csv = dir.join(format!("{stem}metrics.csv"));
    write_file(&csv, &output::metrics_csv(&run.report)?)?;
    Ok(vec![trace, text, csv])
}

fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<PathBuf, CliError> {
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    write_file(&path, &(text + "\n"))?;
    Ok(path)
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

/// `run`: one observer co-simulated with the plant.
pub fn cmd_run(cfg_path: &Path, out: &Path, seed: Option<u64>, overrides: &[String]) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let mut cfg = config::load(cfg_path, overrides)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let run = run_experiment(&cfg)?;
    prepare_dir(out)?;
    let outputs = write_run(out, "", &run, cfg.output.stride)?;
    let diverged = run.report.diverged;
    let mut manifest = Manifest {
        command: "run".into(),
        config_hash: config::config_hash(&cfg),
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION").into(),
        duration_secs: 0.0,
        diverged,
        outputs,
    };
    manifest.outputs.push(out.join("manifest.json"));
    manifest.duration_secs = start.elapsed().as_secs_f64();
    write_manifest(out, &manifest)?;

    let mut stdout = output::metrics_text(&run.report);
    if let Some(k) = run.trace.diverged_at() {
        stdout.push_str(&format!("diverged at step {k} (t = {})\n", run.trace.grid().time(k)));
    }
    Ok(Outcome {
        exit: if diverged { EXIT_DIVERGED } else { EXIT_OK },
        stdout,
    })
}

/// `compare`: two variants on one recorded plant run.
pub fn cmd_compare(cfg_path: &Path, out: &Path, overrides: &[String]) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let cfg = config::load(cfg_path, overrides)?;
    let cmp = compare_observers(&cfg)?;
    prepare_dir(out)?;
    let mut outputs = Vec::new();
    for (i, run) in cmp.runs.iter().enumerate() {
        let stem = format!("{}_{}_", i + 1, run.variant.as_str());
        outputs.extend(write_run(out, &stem, run, cfg.output.stride)?);
    }
    let table = output::comparison_text(&cmp);
    let report = out.join("comparison.txt");
    write_file(&report, &table)?;
    outputs.push(report);
    outputs.push(out.join("manifest.json"));
    let diverged = cmp.runs.iter().any(|r| r.report.diverged);
    let manifest = Manifest {
        command: "compare".into(),
        config_hash: config::config_hash(&cfg),
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION").into(),
        duration_secs: start.elapsed().as_secs_f64(),
        diverged,
        outputs,
    };
    write_manifest(out, &manifest)?;
    Ok(Outcome {
        exit: if diverged { EXIT_DIVERGED } else { EXIT_OK },
        stdout: table,
    })
}

/// `validate`: the numerics oracle suite.
pub fn cmd_validate() -> Outcome {
    let report = run_checks();
    let mut stdout = String::from("tolerances:\n");
    for line in tolerance_listing().lines() {
        stdout.push_str(&format!("  {line}\n"));
    }
    stdout.push_str("checks:\n");
    for c in &report.checks {
        stdout.push_str(&format!("  {c}\n"));
    }
    let passed = report.checks.iter().filter(|c| c.passed).count();
    stdout.push_str(&format!(
        "{passed}/{} checks passed in {:.2} s\n",
        report.checks.len(),
        report.elapsed_secs
    ));
    Outcome {
        exit: if report.all_passed() { EXIT_OK } else { EXIT_VALIDATION },
        stdout,
    }
}

/// `dump-config`: a bundled experiment as pretty JSON.
pub fn cmd_dump_config(preset: &str) -> Result<Outcome, CliError> {
    let cfg = ExperimentConfig::preset(preset)?;
    Ok(Outcome {
        exit: EXIT_OK,
        stdout: serde_json::to_string_pretty(&cfg).expect("config serializes") + "\n",
    })
}
