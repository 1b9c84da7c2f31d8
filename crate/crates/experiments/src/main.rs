use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use gwrnet_experiments::{execute, Command, ExperimentConfig};

#[derive(Parser)]
#[command(name = "gwrnet", version, about = "Incremental motion learning and prediction experiments")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Introduce the patterns one at a time and track C.P.E. and P.E.
    Train(Common),
    /// Retrain the predictive layer for every activation threshold.
    SweepAt(Common),
    /// Prediction error against the forecast horizon.
    SweepHorizon(Common),
    /// Train on data with chunks removed, for every loss fraction.
    SweepLoss(Common),
    /// Delay compensated command streams on held-out repetitions.
    DelayDemo(Common),
    /// Write the configured dataset as CSV files with a manifest.
    GenData(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration.
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Saved hierarchy to start from, for the sweeps and the delay demo.
    #[arg(long)]
    model: Option<PathBuf>,
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let (command, args) = match cli.verb {
        Verb::Train(a) => (Command::Train, a),
        Verb::SweepAt(a) => (Command::SweepAt, a),
        Verb::SweepHorizon(a) => (Command::SweepHorizon, a),
        Verb::SweepLoss(a) => (Command::SweepLoss, a),
        Verb::DelayDemo(a) => (Command::DelayDemo, a),
        Verb::GenData(a) => (Command::GenData, a),
    };
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(dir) = args.out_dir {
        config.output_dir = dir;
    }
    let manifest = execute(command, &config, args.model.as_deref())
        .with_context(|| format!("{} failed", command.name()))?;
    println!(
        "{}: {} files in {} (config {})",
        command.name(),
        manifest.outputs.len(),
        config.output_dir.display(),
        &manifest.config_hash[..12]
    );
    Ok(())
}
