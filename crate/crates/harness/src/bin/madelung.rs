use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use madelung_harness::config::OutputFormat;
use madelung_harness::experiment::write_error_report;
use madelung_harness::{load_config, run_experiment, ExperimentConfig, ExperimentKind, HarnessError};

#[derive(Parser, Debug)]
#[command(name = "madelung", version, about = "Quantum learning trajectories and dissipative Schrödinger runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML config (or a previous run's meta.json)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, overrides output.dir
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format, overrides output.format
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Reserved; all experiments are deterministic
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Run the discrete quantum learner
    Learn,
    /// Propagate a wavefunction with the dissipative Schrödinger equation
    Evolve,
    /// Quantum learner against classical momentum gradient descent
    Compare,
    /// Reproduce Figure 1: learner trajectory plus density snapshots
    Figure1,
    /// Run one experiment over a list of parameter values
    Sweep,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Format {
    Csv,
    Json,
}

impl From<Command> for ExperimentKind {
    fn from(c: Command) -> Self {
        match c {
            Command::Learn => ExperimentKind::Learn,
            Command::Evolve => ExperimentKind::Evolve,
            Command::Compare => ExperimentKind::Compare,
            Command::Figure1 => ExperimentKind::Figure1,
            Command::Sweep => ExperimentKind::Sweep,
        }
    }
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, HarnessError> {
    let kind = ExperimentKind::from(cli.command);
    let mut config = match &cli.config {
        Some(path) => load_config(path, Some(kind))?,
        None => ExperimentConfig::new(kind).resolve(Some(kind))?,
    };
    if let Some(dir) = &cli.out {
        config.output.dir = dir.clone();
    }
    if let Some(f) = cli.format {
        config.output.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        };
    }
    Ok(config)
}

fn fail(err: HarnessError, dir: Option<&Path>) -> ExitCode {
    let report = err.report();
    if let Some(dir) = dir {
        // stderr carries the same report if the directory is unwritable
        let _ = write_error_report(dir, &report);
    }
    eprintln!("{}", serde_json::to_string(&report).unwrap_or_else(|_| err.to_string()));
    ExitCode::from(report.exit_code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => return fail(e, cli.out.as_deref()),
    };
    match run_experiment(&config, cli.seed) {
        Ok(report) => {
            if !cli.quiet {
                let status = serde_json::to_string(&report.meta.status).unwrap_or_default();
                println!(
                    "{} -> {} {} ({:.3} s)",
                    config.kind(),
                    config.output.dir.display(),
                    status,
                    report.meta.wall_time_s
                );
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => fail(e, Some(&config.output.dir)),
    }
}
