//! The CLI verbs, callable without the binary.

use std::fs;
use std::path::Path;

use gwrnet::Hierarchy64;
use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig};
use crate::dataset::Dataset;
use crate::delay_demo::run_delay_demo;
use crate::error::{HarnessError, Result};
use crate::incremental::{run_incremental, train_base, IncrementalRun};
use crate::output::{RunManifest, RunWriter};
use crate::sweeps::{sweep_activation_threshold, sweep_data_loss, sweep_horizon};

pub const MODEL_FILE: &str = "model.gwrh";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Train,
    SweepAt,
    SweepHorizon,
    SweepLoss,
    DelayDemo,
    GenData,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Train => "train",
            Command::SweepAt => "sweep-at",
            Command::SweepHorizon => "sweep-horizon",
            Command::SweepLoss => "sweep-loss",
            Command::DelayDemo => "delay-demo",
            Command::GenData => "gen-data",
        }
    }

    fn experiment(self) -> Experiment {
        match self {
            Command::Train => Experiment::Incremental,
            Command::SweepAt => Experiment::ActivationSweep,
            Command::SweepHorizon => Experiment::HorizonSweep,
            Command::SweepLoss => Experiment::LossSweep,
            Command::DelayDemo => Experiment::Delay,
            Command::GenData => Experiment::GenerateData,
        }
    }
}

/// Runs `command` and writes its outputs under `config.output_dir`.
///
/// The sweeps and the delay demo start from `model` when given, otherwise
/// from a hierarchy trained on the whole dataset, which is saved alongside.
pub fn execute(command: Command, config: &ExperimentConfig, model: Option<&Path>) -> Result<RunManifest> {
    config.validate(command.experiment())?;
    let dataset = Dataset::build(&config.dataset, config.seed)?;
    let mut out = RunWriter::create(&config.output_dir)?;
    out.write_bytes("config.toml", config.to_toml().as_bytes())?;
    match command {
        Command::Train => {
            let run = run_incremental(config, &dataset)?;
            write_incremental(&mut out, &run)?;
            let model = run.orders[0].model.to_snapshot()?;
            out.write_bytes(MODEL_FILE, model.as_bytes())?;
        }
        Command::GenData => {
            let entries = gwrnet::data::save_dataset(&out.dir().join("data"), &dataset.all_demos())?;
            for e in &entries {
                out.record_existing(&format!("data/{}", e.file))?;
                out.record_existing(&format!("data/{}.meta", e.file))?;
            }
            out.record_existing("data/manifest.csv")?;
        }
        Command::SweepLoss => {
            let rows = sweep_data_loss(config, &dataset)?;
            out.write_rows("sweep_loss.csv", &rows)?;
        }
        Command::SweepAt | Command::SweepHorizon | Command::DelayDemo => {
            let base = base_model(config, &dataset, model, &mut out)?;
            match command {
                Command::SweepAt => {
                    let rows = sweep_activation_threshold(config, &dataset, &base)?;
                    out.write_rows("sweep_at.csv", &rows)?;
                }
                Command::SweepHorizon => {
                    let rows = sweep_horizon(config, &dataset, &base)?;
                    out.write_rows("sweep_horizon.csv", &rows)?;
                }
                _ => {
                    let run = run_delay_demo(config, &dataset, &base)?;
                    out.write_rows("delay_demos.csv", &run.demos)?;
                    out.write_rows("delay_patterns.csv", &run.patterns)?;
                    for (name, report) in &run.reports {
                        let mut buf = Vec::new();
                        report.write_csv(&mut buf)?;
                        out.write_bytes(&format!("lag/{name}.csv"), &buf)?;
                    }
                }
            }
        }
    }
    out.finish(command.name(), config.seed, config.hash())
}

fn base_model(
    config: &ExperimentConfig,
    dataset: &Dataset,
    model: Option<&Path>,
    out: &mut RunWriter,
) -> Result<Hierarchy64> {
    if let Some(path) = model {
        let text = fs::read_to_string(path)?;
        let h = Hierarchy64::from_snapshot(&text)?;
        if h.config().frame_dim != config.hierarchy.frame_dim {
            return Err(HarnessError::Config("model frame_dim differs from the config".into()));
        }
        return Ok(h);
    }
    let h = train_base(config, dataset)?;
    out.write_bytes(MODEL_FILE, h.to_snapshot()?.as_bytes())?;
    Ok(h)
}

#[derive(Serialize)]
struct OrderRow<'a> {
    order: usize,
    epoch: usize,
    block: usize,
    epoch_in_block: usize,
    pattern: &'a str,
    cpe: f64,
    pe: f64,
    neurons_gwr1: usize,
    neurons_gwr2: usize,
    neurons_pgwr: usize,
    steps_gwr1: usize,
    steps_gwr2: usize,
    steps_pgwr: usize,
    online_mse: Option<f64>,
}

#[derive(Serialize)]
struct SequenceRow<'a> {
    order: usize,
    epoch: usize,
    position: usize,
    pattern: &'a str,
    mse: f64,
    pe: f64,
}

#[derive(Serialize)]
struct PermutationRow<'a> {
    order: usize,
    position: usize,
    pattern: &'a str,
}

fn write_incremental(out: &mut RunWriter, run: &IncrementalRun) -> Result<()> {
    let mut orders = Vec::new();
    let mut sequences = Vec::new();
    let mut perms = Vec::new();
    let mut adaptation = Vec::new();
    for o in &run.orders {
        let labels: Vec<&str> = {
            let mut l = vec![""; o.order.len()];
            for r in &o.records {
                l[r.block] = &r.pattern;
            }
            l
        };
        for (position, pattern) in labels.iter().enumerate() {
            perms.push(PermutationRow {
                order: o.records[0].order,
                position,
                pattern,
            });
        }
        for r in &o.records {
            orders.push(OrderRow {
                order: r.order,
                epoch: r.epoch,
                block: r.block,
                epoch_in_block: r.epoch_in_block,
                pattern: &r.pattern,
                cpe: r.cpe,
                pe: r.pe,
                neurons_gwr1: r.neurons[0],
                neurons_gwr2: r.neurons[1],
                neurons_pgwr: r.neurons[2],
                steps_gwr1: r.steps[0],
                steps_gwr2: r.steps[1],
                steps_pgwr: r.steps[2],
                online_mse: r.online_mse,
            });
            for (position, (&mse, &pe)) in r.sequence_mse.iter().zip(&r.sequence_pe).enumerate() {
                sequences.push(SequenceRow {
                    order: r.order,
                    epoch: r.epoch,
                    position,
                    pattern: labels[position],
                    mse,
                    pe,
                });
            }
        }
        adaptation.extend(o.adaptation.iter().cloned());
    }
    out.write_rows("orders.csv", &perms)?;
    out.write_rows("incremental_orders.csv", &orders)?;
    out.write_rows("incremental_sequences.csv", &sequences)?;
    out.write_rows("incremental.csv", &run.averaged)?;
    out.write_rows("adaptation.csv", &adaptation)?;
    Ok(())
}
