use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use tofmux::{ExperimentKind, ScenarioFile};

/// Multi-camera time-of-flight interference experiments.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assign interference-free trigger offsets and verify them.
    Schedule(RunArgs),
    /// Sweep the trigger shift of a second camera over one frame.
    Sweep(RunArgs),
    /// Label frames of two free-running cameras from their timestamps.
    Periodicity(RunArgs),
    /// Pick interference-free frames from saturation counts alone.
    Extract(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Directory for the CSV files and summary.txt.
    #[arg(long)]
    out: PathBuf,
    /// Overrides `sim.seed` from the scenario file.
    #[arg(long)]
    seed: Option<u64>,
}

// A closed stdout must not turn a finished run into a failure.
fn emit(text: &str) {
    let _ = io::stdout().lock().write_all(text.as_bytes());
}

fn execute(kind: ExperimentKind, args: RunArgs) -> anyhow::Result<bool> {
    let mut file = ScenarioFile::load(&args.scenario)?;
    if let Some(seed) = args.seed {
        file.sim.seed = seed;
    }
    let resolved = file.resolved().context("resolving scenario")?;
    emit(&format!("# resolved scenario\n{}", resolved.to_toml()));
    let report = tofmux::run(&file, kind, &args.out).with_context(|| format!("{kind} failed"))?;
    let marker = format!("\n# {kind} results\n");
    let results = report.summary.split_once(&marker).map_or(report.summary.as_str(), |(_, r)| r);
    emit(&format!("{marker}{results}"));
    Ok(report.valid)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Schedule(a) => (ExperimentKind::Schedule, a),
        Command::Sweep(a) => (ExperimentKind::Sweep, a),
        Command::Periodicity(a) => (ExperimentKind::Periodicity, a),
        Command::Extract(a) => (ExperimentKind::Extract, a),
    };
    match execute(kind, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
