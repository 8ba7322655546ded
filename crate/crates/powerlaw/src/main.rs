//! Command-line front end: each subcommand runs one experiment kind from a
//! JSON config and writes its artifacts plus a reproducible manifest.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use powerlaw::experiment::{parse_config, run_experiment, Kind, Overrides};

#[derive(Parser)]
#[command(
    name = "powerlaw",
    about = "Simulation and analysis of SGD-like diffusions with state-dependent gradient noise",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON experiment config
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out` in the config)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (overrides `master_seed` in the config)
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for parallel sections (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory of a configured dynamic
    Simulate(CommonArgs),
    /// Tabulate a stationary density on a grid
    Density(CommonArgs),
    /// Closed-form escape-time comparison over a parameter grid
    EscapeAnalytic(CommonArgs),
    /// Monte Carlo first-passage times on a double well
    EscapeMc(CommonArgs),
    /// Escape success rates on the toy loss, with optional SGD baseline
    SuccessRate(CommonArgs),
    /// Minibatch gradient-noise trace along a line, with quadratic fit
    NoiseScan(CommonArgs),
    /// Maximum-likelihood tail-index fit with histogram and overlay
    Fit(CommonArgs),
    /// PAC-Bayes KL and generalization bound
    Bound(CommonArgs),
}

impl Command {
    fn parts(&self) -> (Kind, &CommonArgs) {
        match self {
            Command::Simulate(a) => (Kind::Simulate, a),
            Command::Density(a) => (Kind::Density, a),
            Command::EscapeAnalytic(a) => (Kind::EscapeAnalytic, a),
            Command::EscapeMc(a) => (Kind::EscapeMc, a),
            Command::SuccessRate(a) => (Kind::SuccessRate, a),
            Command::NoiseScan(a) => (Kind::NoiseScan, a),
            Command::Fit(a) => (Kind::Fit, a),
            Command::Bound(a) => (Kind::Bound, a),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = cli.command.parts();
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn execute(kind: Kind, args: &CommonArgs) -> Result<(), String> {
    let json = std::fs::read_to_string(&args.config)
        .map_err(|e| format!("cannot read {}: {e}", args.config.display()))?;
    let config =
        parse_config(&json).map_err(|e| format!("{}: {e}", args.config.display()))?;
    if config.params.kind() != kind {
        return Err(format!(
            "config kind is `{}` but the subcommand is `{kind}`",
            config.params.kind()
        ));
    }
    let overrides = Overrides {
        out: args.out.clone(),
        seed: args.seed,
        threads: args.threads,
    };
    let report = run_experiment(config, &overrides).map_err(|e| e.to_string())?;
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    for file in &report.files {
        println!("{}", file.display());
    }
    Ok(())
}
