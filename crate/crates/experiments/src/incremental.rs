//! Patterns introduced one at a time, each trained for a block of epochs.

use gwrnet::{Hierarchy64, TrainScope};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::dataset::{Dataset, PatternData};
use crate::error::Result;
use crate::metrics::{cumulative, frames_to_adapt, median, pattern_error, MetricsRecord};
use crate::seeds::derive_seed;

/// Counters of one pass over a pattern's training demonstrations.
#[derive(Debug, Clone, Default)]
pub struct EpochTrace {
    pub steps: [usize; 3],
    pub frame_errors: Vec<f64>,
}

/// One epoch: every training demonstration of `pattern` once, in order.
pub fn train_epoch(h: &mut Hierarchy64, pattern: &PatternData, scope: TrainScope) -> Result<EpochTrace> {
    let mut trace = EpochTrace::default();
    for demo in &pattern.train {
        let report = h.train_sequence_scoped(&demo.sequence, 1, scope)?;
        for e in report.epochs {
            for (s, l) in trace.steps.iter_mut().zip(&e.layers) {
                *s += l.steps;
            }
            trace.frame_errors.extend(e.frame_errors);
        }
    }
    Ok(trace)
}

/// The patterns in dataset order, `epochs` epochs each.
pub fn train_schedule(h: &mut Hierarchy64, dataset: &Dataset, epochs: usize, scope: TrainScope) -> Result<()> {
    for pattern in &dataset.patterns {
        for _ in 0..epochs {
            train_epoch(h, pattern, scope)?;
        }
    }
    Ok(())
}

/// A fresh hierarchy trained on the whole dataset in dataset order.
pub fn train_base(config: &ExperimentConfig, dataset: &Dataset) -> Result<Hierarchy64> {
    let mut h = Hierarchy64::new(config.hierarchy.clone())?;
    train_schedule(&mut h, dataset, config.epochs_per_sequence, TrainScope::All)?;
    Ok(h)
}

/// Presentation order `index`: a permutation of pattern positions.
pub fn presentation_order(seed: u64, index: usize, patterns: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..patterns).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "order", &[index as u64]));
    order.shuffle(&mut rng);
    order
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdaptationRow {
    pub order: usize,
    pub block: usize,
    pub pattern: String,
    /// Frames of the block until the online error fell below twice its
    /// median over the last epoch; empty when it never did.
    pub frames_to_adapt: Option<usize>,
    pub converged_median: Option<f64>,
}

/// Mean over presentation orders of the records at one epoch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AveragedRecord {
    pub epoch: usize,
    pub block: usize,
    pub epoch_in_block: usize,
    pub cpe: f64,
    pub cpe_std: f64,
    pub pe: f64,
    pub neurons_gwr1: f64,
    pub neurons_gwr2: f64,
    pub neurons_pgwr: f64,
}

#[derive(Debug, Clone)]
pub struct OrderRun {
    pub order: Vec<usize>,
    pub records: Vec<MetricsRecord>,
    pub adaptation: Vec<AdaptationRow>,
    pub model: Hierarchy64,
}

#[derive(Debug, Clone)]
pub struct IncrementalRun {
    pub orders: Vec<OrderRun>,
    pub averaged: Vec<AveragedRecord>,
}

pub fn run_order(config: &ExperimentConfig, dataset: &Dataset, index: usize, order: Vec<usize>) -> Result<OrderRun> {
    let mut h = Hierarchy64::new(config.hierarchy.clone())?;
    let mut records = Vec::new();
    let mut adaptation = Vec::new();
    let mut epoch = 0;
    for (block, &pi) in order.iter().enumerate() {
        let pattern = &dataset.patterns[pi];
        let mut block_errors = Vec::new();
        let mut last_errors = Vec::new();
        for epoch_in_block in 1..=config.epochs_per_sequence {
            epoch += 1;
            let trace = train_epoch(&mut h, pattern, TrainScope::All)?;
            let errors = order[..=block]
                .iter()
                .map(|&j| pattern_error(&h, &dataset.patterns[j].eval, config.eval_horizon))
                .collect::<Result<Vec<_>>>()?;
            let (cpe, pe) = cumulative(&errors);
            let online_mse = (!trace.frame_errors.is_empty())
                .then(|| trace.frame_errors.iter().sum::<f64>() / trace.frame_errors.len() as f64);
            block_errors.extend_from_slice(&trace.frame_errors);
            last_errors = trace.frame_errors;
            records.push(MetricsRecord {
                order: index,
                epoch,
                block,
                epoch_in_block,
                pattern: pattern.label.clone(),
                sequence_mse: errors.iter().map(|e| e.mse).collect(),
                sequence_pe: errors.iter().map(|e| e.pe).collect(),
                cpe,
                pe,
                neurons: h.neuron_counts(),
                steps: trace.steps,
                online_mse,
            });
        }
        adaptation.push(AdaptationRow {
            order: index,
            block,
            pattern: pattern.label.clone(),
            frames_to_adapt: frames_to_adapt(&block_errors, &last_errors),
            converged_median: median(&last_errors),
        });
    }
    Ok(OrderRun {
        order,
        records,
        adaptation,
        model: h,
    })
}

/// Runs every presentation order in parallel and averages them epoch by epoch.
pub fn run_incremental(config: &ExperimentConfig, dataset: &Dataset) -> Result<IncrementalRun> {
    let n = dataset.patterns.len();
    let orders = (0..config.presentation_orders)
        .into_par_iter()
        .map(|i| run_order(config, dataset, i, presentation_order(config.seed, i, n)))
        .collect::<Result<Vec<_>>>()?;
    let averaged = average(&orders);
    Ok(IncrementalRun { orders, averaged })
}

fn average(orders: &[OrderRun]) -> Vec<AveragedRecord> {
    let Some(first) = orders.first() else { return Vec::new() };
    let k = orders.len() as f64;
    first
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let at: Vec<&MetricsRecord> = orders.iter().map(|o| &o.records[i]).collect();
            let mean = |f: &dyn Fn(&MetricsRecord) -> f64| at.iter().map(|r| f(r)).sum::<f64>() / k;
            let cpe = mean(&|r| r.cpe);
            AveragedRecord {
                epoch: r.epoch,
                block: r.block,
                epoch_in_block: r.epoch_in_block,
                cpe,
                cpe_std: (mean(&|r| (r.cpe - cpe) * (r.cpe - cpe))).sqrt(),
                pe: mean(&|r| r.pe),
                neurons_gwr1: mean(&|r| r.neurons[0] as f64),
                neurons_gwr2: mean(&|r| r.neurons[1] as f64),
                neurons_pgwr: mean(&|r| r.neurons[2] as f64),
            }
        })
        .collect()
}
