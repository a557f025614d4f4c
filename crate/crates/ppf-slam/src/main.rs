//! Command-line harness around the observer library.

use clap::{Args, Parser, Subcommand, ValueEnum};
use ppf_slam::harness::{
    self, compare_backends, emit_csv, read_csv, Backend, ExperimentConfig, HarnessError,
    RunMetrics, RunOutcome,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_ENVELOPE: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "ppf-slam", version, about = "SLAM observer simulation harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario; write run_log.csv and metrics.json.
    Run(RunArgs),
    /// Run both attitude backends on identical measurements and report
    /// sup-norm trajectory differences.
    CompareBackends(RunArgs),
    /// Write the published study scenario as a config file.
    PaperScenario {
        /// Output path for the config.
        #[arg(long, default_value = "paper_scenario.json")]
        out: PathBuf,
    },
    /// Recompute metrics from an existing log.
    Metrics {
        /// Path of a run_log.csv written by `run`.
        #[arg(long)]
        log: PathBuf,
        /// Where to write the metrics JSON (default: next to the log).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config JSON; defaults to the built-in paper scenario.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Attitude backend (overrides the config).
    #[arg(long, value_enum)]
    backend: Option<Backend>,
    /// Velocity measurement noise on/off.
    #[arg(long, value_enum)]
    noise: Option<NoiseFlag>,
    /// Simulated duration in seconds (overrides the config).
    #[arg(long)]
    duration: Option<f64>,
    /// Integration step in seconds (overrides the config).
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NoiseFlag {
    On,
    Off,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig, HarnessError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::paper_scenario(),
        };
        if let Some(out) = &self.out {
            cfg.logging.out_dir = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.scenario.seed = seed;
        }
        if let Some(backend) = self.backend {
            cfg.observer.backend = backend;
        }
        match self.noise {
            Some(NoiseFlag::Off) => cfg.scenario.noise_std = 0.0,
            Some(NoiseFlag::On) if cfg.scenario.noise_std == 0.0 => {
                cfg.scenario.noise_std = 0.2;
            }
            _ => {}
        }
        if let Some(duration) = self.duration {
            cfg.scenario.duration = duration;
        }
        if let Some(dt) = self.dt {
            cfg.scenario.dt = dt;
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::CompareBackends(args) => cmd_compare(&args),
        Command::PaperScenario { out } => cmd_paper_scenario(&out),
        Command::Metrics { log, out } => cmd_metrics(&log, out.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &HarnessError) -> u8 {
    match err {
        HarnessError::Config(_) | HarnessError::Json(_) => EXIT_CONFIG,
        HarnessError::Io(_) | HarnessError::Csv(_) | HarnessError::LogFormat(_) => EXIT_IO,
        HarnessError::EnvelopeFailure { .. } => EXIT_ENVELOPE,
    }
}

fn cmd_run(args: &RunArgs) -> Result<u8, HarnessError> {
    let cfg = args.config()?;
    let out_dir = cfg.logging.out_dir.clone();
    std::fs::create_dir_all(&out_dir)?;

    let outcome = harness::run(&cfg)?;
    for warning in &outcome.warnings {
        eprintln!("warning: {warning}");
    }

    let log_path = out_dir.join("run_log.csv");
    emit_csv(&outcome.log, &log_path)?;
    write_json(&out_dir.join("metrics.json"), &outcome.metrics)?;
    print_summary(&outcome, &log_path);

    if let Some(failure) = &outcome.failure {
        eprintln!("run failed at t = {} s: {}", failure.t, failure.error);
        return Ok(EXIT_ENVELOPE);
    }
    if outcome.metrics.envelope_violation_count > 0 {
        return Ok(EXIT_ENVELOPE);
    }
    Ok(EXIT_OK)
}

fn print_summary(outcome: &RunOutcome, log_path: &Path) {
    let m = &outcome.metrics;
    println!("rows logged           {}", m.rows);
    println!("envelope violations   {}", m.envelope_violation_count);
    println!("max |e| (tail window) {:.6}", m.max_error_tail);
    println!("final ‖b̃‖            {:.6}", m.bias_error_final);
    println!(
        "pose drift (rot/pos)  {:.6} / {:.6}",
        m.pose_drift_rotation, m.pose_drift_position
    );
    if let Some(wall) = m.wall_clock_seconds {
        println!("wall clock            {wall:.3} s");
    }
    println!("log written to        {}", log_path.display());
}

fn cmd_compare(args: &RunArgs) -> Result<u8, HarnessError> {
    let cfg = args.config()?;
    let out_dir = cfg.logging.out_dir.clone();
    std::fs::create_dir_all(&out_dir)?;

    let report = compare_backends(&cfg)?;
    write_json(&out_dir.join("backend_comparison.json"), &report)?;
    println!("rows compared      {}", report.rows_compared);
    println!(
        "pose rotation diff {:.3e} (at t = {:.3} s)",
        report.pose_rotation.max, report.pose_rotation.at_t
    );
    println!(
        "pose position diff {:.3e} (at t = {:.3} s)",
        report.pose_position.max, report.pose_position.at_t
    );
    println!(
        "landmark diff      {:.3e} (at t = {:.3} s)",
        report.landmarks.max, report.landmarks.at_t
    );
    println!(
        "bias diff          {:.3e} (at t = {:.3} s)",
        report.bias.max, report.bias.at_t
    );
    Ok(EXIT_OK)
}

fn cmd_paper_scenario(out: &Path) -> Result<u8, HarnessError> {
    let cfg = ExperimentConfig::paper_scenario();
    cfg.save(out)?;
    println!("wrote {}", out.display());
    Ok(EXIT_OK)
}

fn cmd_metrics(log_path: &Path, out: Option<&Path>) -> Result<u8, HarnessError> {
    let log = read_csv(log_path)?;
    let metrics = RunMetrics::from_log(&log);
    let out_path = match out {
        Some(p) => p.to_path_buf(),
        None => log_path.with_extension("metrics.json"),
    };
    write_json(&out_path, &metrics)?;
    println!("rows                  {}", metrics.rows);
    println!("envelope violations   {}", metrics.envelope_violation_count);
    println!("max |e| (tail window) {:.6}", metrics.max_error_tail);
    println!("final ‖b̃‖            {:.6}", metrics.bias_error_final);
    println!("metrics written to    {}", out_path.display());
    if metrics.envelope_violation_count > 0 {
        return Ok(EXIT_ENVELOPE);
    }
    Ok(EXIT_OK)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
