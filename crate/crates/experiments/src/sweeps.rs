//! Activation threshold, prediction horizon and data loss sweeps.

use gwrnet::data::corrupt_dropout;
use gwrnet::hierarchy::summarize;
use gwrnet::{GwrError, Hierarchy64, TrainScope};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::dataset::Dataset;
use crate::error::Result;
use crate::incremental::train_schedule;
use crate::metrics::{cumulative, pattern_error, PatternError};
use crate::seeds::derive_seed;

/// Errors of every pattern's evaluation demonstrations: `(mse, pe, mae)`
/// averaged over patterns.
pub fn suite_error(h: &Hierarchy64, dataset: &Dataset, horizon: usize) -> Result<(f64, f64, f64)> {
    let errors: Vec<PatternError> = dataset
        .patterns
        .iter()
        .map(|p| pattern_error(h, &p.eval, horizon))
        .collect::<Result<_>>()?;
    let (mse, pe) = cumulative(&errors);
    let mae = errors.iter().map(|e| e.mae).sum::<f64>() / errors.len().max(1) as f64;
    Ok((mse, pe, mae))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub activation_threshold: f64,
    pub neurons: usize,
    pub mse: f64,
    pub pe: f64,
    pub mae: f64,
}

/// Retrains only the predictive layer of `base` once per threshold; the
/// lower layers stay frozen.
pub fn sweep_activation_threshold(
    config: &ExperimentConfig,
    dataset: &Dataset,
    base: &Hierarchy64,
) -> Result<Vec<ThresholdRow>> {
    if base.gwr1().is_none() || base.gwr2().is_none() {
        return Err(GwrError::Uninitialized.into());
    }
    config
        .sweep
        .activation_thresholds
        .par_iter()
        .map(|&a_t| {
            let mut h = base.clone();
            h.replace_predictor(config.hierarchy.pgwr.with_activation_threshold(a_t))?;
            train_schedule(&mut h, dataset, config.epochs_per_sequence, TrainScope::PredictorOnly)?;
            let (mse, pe, mae) = suite_error(&h, dataset, config.eval_horizon)?;
            Ok(ThresholdRow {
                activation_threshold: a_t,
                neurons: h.neuron_counts()[2],
                mse,
                pe,
                mae,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonRow {
    pub horizon: usize,
    pub mae: f64,
    pub mae_std: f64,
    pub mse: f64,
    pub records: usize,
}

/// Recursive or vector forecasts up to the largest requested horizon, pooled
/// over every pattern's evaluation demonstrations.
pub fn sweep_horizon(config: &ExperimentConfig, dataset: &Dataset, h: &Hierarchy64) -> Result<Vec<HorizonRow>> {
    if !h.is_trained() {
        return Err(GwrError::Uninitialized.into());
    }
    let max = config.sweep.horizons.iter().copied().max().unwrap_or(1);
    let mut records = Vec::new();
    for p in &dataset.patterns {
        for d in &p.eval {
            records.extend(h.evaluate_sequence(&d.sequence, max)?);
        }
    }
    let stats = summarize(&records, max);
    Ok(config
        .sweep
        .horizons
        .iter()
        .map(|&k| {
            let s = &stats[k - 1];
            HorizonRow {
                horizon: k,
                mae: s.mae,
                mae_std: s.mae_std,
                mse: s.mse,
                records: s.records,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossRow {
    pub loss_fraction: f64,
    /// Mean fraction actually removed over all presentations.
    pub achieved_fraction: f64,
    /// Epochs after which the hierarchy could forecast at all.
    pub scored_epochs: usize,
    /// MSE after each scored epoch, averaged over those epochs.
    pub mse: Option<f64>,
    pub pe: Option<f64>,
    pub final_mse: Option<f64>,
    /// Mean over patterns.
    pub neurons_pgwr: usize,
}

/// Per fraction and pattern, a fresh hierarchy is trained on that pattern's
/// demonstrations, each presentation with its own randomly removed chunks,
/// and scored on the clean evaluation demonstrations after every epoch. The
/// per-pattern epoch means are then averaged over patterns.
///
/// Under heavy loss no surviving run may be long enough to train on. Epochs
/// that end with an untrained hierarchy are left out of the averages, and so
/// are patterns that never trained.
pub fn sweep_data_loss(config: &ExperimentConfig, dataset: &Dataset) -> Result<Vec<LossRow>> {
    let runs: Vec<(usize, usize)> = (0..config.sweep.loss_fractions.len())
        .flat_map(|fi| (0..dataset.patterns.len()).map(move |pi| (fi, pi)))
        .collect();
    let results = runs
        .par_iter()
        .map(|&(fi, pi)| loss_run(config, dataset, fi, pi))
        .collect::<Result<Vec<_>>>()?;
    let np = dataset.patterns.len();
    Ok(config
        .sweep
        .loss_fractions
        .iter()
        .enumerate()
        .map(|(fi, &fraction)| {
            let runs = &results[fi * np..(fi + 1) * np];
            let trained: Vec<&LossRun> = runs.iter().filter(|r| r.scored > 0).collect();
            let mean = |f: fn(&LossRun) -> f64| {
                (!trained.is_empty()).then(|| trained.iter().map(|r| f(r)).sum::<f64>() / trained.len() as f64)
            };
            LossRow {
                loss_fraction: fraction,
                achieved_fraction: runs.iter().map(|r| r.removed).sum::<f64>()
                    / runs.iter().map(|r| r.shown).sum::<usize>().max(1) as f64,
                scored_epochs: runs.iter().map(|r| r.scored).sum(),
                mse: mean(|r| r.mse_sum / r.scored as f64),
                pe: mean(|r| r.pe_sum / r.scored as f64),
                final_mse: mean(|r| r.last),
                neurons_pgwr: runs.iter().map(|r| r.neurons).sum::<usize>() / np.max(1),
            }
        })
        .collect())
}

struct LossRun {
    removed: f64,
    shown: usize,
    scored: usize,
    mse_sum: f64,
    pe_sum: f64,
    last: f64,
    neurons: usize,
}

fn loss_run(config: &ExperimentConfig, dataset: &Dataset, fi: usize, pi: usize) -> Result<LossRun> {
    let fraction = config.sweep.loss_fractions[fi];
    let p = &dataset.patterns[pi];
    let mut h = Hierarchy64::new(config.hierarchy.clone())?;
    let mut run = LossRun {
        removed: 0.0,
        shown: 0,
        scored: 0,
        mse_sum: 0.0,
        pe_sum: 0.0,
        last: 0.0,
        neurons: 0,
    };
    for epoch in 0..config.epochs_per_sequence {
        for (di, d) in p.train.iter().enumerate() {
            let seed = derive_seed(config.seed, "loss", &[fi as u64, epoch as u64, pi as u64, di as u64]);
            let cut = corrupt_dropout(&d.sequence, fraction, config.sweep.loss_chunk_frames, seed)?;
            run.removed += cut.achieved_fraction;
            run.shown += 1;
            h.train_sequence(&cut.corrupted, 1)?;
        }
        if !h.is_trained() {
            continue;
        }
        let e = pattern_error(&h, &p.eval, config.eval_horizon)?;
        run.mse_sum += e.mse;
        run.pe_sum += e.pe;
        run.last = e.mse;
        run.scored += 1;
    }
    run.neurons = h.neuron_counts()[2];
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::DatasetConfig;
    use crate::incremental::train_base;

    fn small() -> (ExperimentConfig, Dataset) {
        let c = ExperimentConfig {
            epochs_per_sequence: 3,
            dataset: DatasetConfig {
                patterns: vec!["circle-cw-both".into(), "raise-front-left".into()],
                subjects: 1,
                repetitions: 2,
                held_out_repetitions: 1,
                duration_s: 6.0,
                ..DatasetConfig::default()
            },
            ..ExperimentConfig::default()
        };
        let ds = Dataset::build(&c.dataset, c.seed).unwrap();
        (c, ds)
    }

    #[test]
    fn horizon_one_matches_one_step_error() {
        let (mut c, ds) = small();
        c.sweep.horizons = vec![1, 2, 5];
        let h = train_base(&c, &ds).unwrap();
        let rows = sweep_horizon(&c, &ds, &h).unwrap();
        assert_eq!(rows.iter().map(|r| r.horizon).collect::<Vec<_>>(), vec![1, 2, 5]);
        let mut one = Vec::new();
        for p in &ds.patterns {
            for d in &p.eval {
                one.extend(h.evaluate_sequence(&d.sequence, 1).unwrap());
            }
        }
        let e = crate::metrics::pooled_error(&one);
        assert!((rows[0].mae - e.mae).abs() < 1e-12);
        assert_eq!(rows[0].records, e.predictions);
        assert!(rows[2].records < rows[0].records);
    }

    #[test]
    fn threshold_sweep_keeps_lower_layers() {
        let (mut c, ds) = small();
        c.sweep.activation_thresholds = vec![0.5, 0.99];
        let h = train_base(&c, &ds).unwrap();
        let rows = sweep_activation_threshold(&c, &ds, &h).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[1].neurons > rows[0].neurons);
        let fresh = Hierarchy64::new(c.hierarchy.clone()).unwrap();
        assert!(sweep_activation_threshold(&c, &ds, &fresh).is_err());
        assert!(sweep_horizon(&c, &ds, &fresh).is_err());
    }

    #[test]
    fn zero_loss_is_clean_training() {
        let (mut c, ds) = small();
        c.epochs_per_sequence = 2;
        c.sweep.loss_fractions = vec![0.0, 0.5];
        let rows = sweep_data_loss(&c, &ds).unwrap();
        assert_eq!(rows[0].achieved_fraction, 0.0);
        assert!(rows[1].achieved_fraction >= 0.5);
        assert!(rows[1].scored_epochs <= 2 * ds.patterns.len());
        // Clean baseline: the same epochs without corruption, one hierarchy per pattern.
        let mut sum = 0.0;
        for p in &ds.patterns {
            let mut h = Hierarchy64::new(c.hierarchy.clone()).unwrap();
            for _ in 0..2 {
                for d in &p.train {
                    h.train_sequence(&d.sequence, 1).unwrap();
                }
                sum += pattern_error(&h, &p.eval, 1).unwrap().mse / 2.0;
            }
        }
        assert_eq!(rows[0].mse, Some(sum / ds.patterns.len() as f64));
        assert_eq!(rows[0].scored_epochs, 2 * ds.patterns.len());
        c.sweep.loss_fractions = vec![0.95];
        c.dataset.duration_s = 3.0;
        let short = Dataset::build(&c.dataset, 0).unwrap();
        assert!(sweep_data_loss(&c, &short).is_err());
    }
}
