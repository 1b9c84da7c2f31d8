//! Delay compensated command streams over held-out repetitions.

use gwrnet::{run_pipeline, DelayModel, GwrError, Hierarchy64, LagReport, PipelineMode};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::dataset::Dataset;
use crate::error::Result;
use crate::seeds::derive_seed;

pub const MODES: [&str; 3] = ["fixed", "variable", "baseline"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelayRow {
    pub pattern: String,
    pub subject: String,
    pub repetition: u32,
    pub mode: String,
    pub rows: usize,
    pub mse: f64,
    pub mae: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelayPatternRow {
    pub pattern: String,
    pub mode: String,
    /// Mean over the pattern's held-out demonstrations.
    pub mae: f64,
    pub mse: f64,
}

#[derive(Debug, Clone)]
pub struct DelayRun {
    pub horizon_frames: usize,
    pub demos: Vec<DelayRow>,
    pub patterns: Vec<DelayPatternRow>,
    /// Lag reports named `<pattern>_<subject>_r<rep>_<mode>`.
    pub reports: Vec<(String, LagReport<f64>)>,
}

pub fn run_delay_demo(config: &ExperimentConfig, dataset: &Dataset, h: &Hierarchy64) -> Result<DelayRun> {
    if !h.is_trained() {
        return Err(GwrError::Uninitialized.into());
    }
    let period = 1000.0 / config.dataset.fps;
    let fixed = DelayModel::new(config.delay.latency_ms, 0.0, period)?;
    let variable = DelayModel::new(config.delay.latency_ms, config.delay.jitter_ms, period)?;
    let mut run = DelayRun {
        horizon_frames: fixed.horizon_frames(),
        demos: Vec::new(),
        patterns: Vec::new(),
        reports: Vec::new(),
    };
    for (pi, p) in dataset.patterns.iter().enumerate() {
        let mut sums = [(0.0, 0.0); 3];
        for (di, d) in p.held_out.iter().enumerate() {
            let seed = derive_seed(config.seed, "delay", &[pi as u64, di as u64]);
            let runs = [
                (&fixed, PipelineMode::Fixed),
                (&variable, PipelineMode::Variable { seed }),
                (&fixed, PipelineMode::Baseline),
            ];
            for (m, (model, mode)) in runs.into_iter().enumerate() {
                let report = run_pipeline(h, &d.sequence, model, mode)?;
                sums[m].0 += report.mae;
                sums[m].1 += report.mse;
                run.demos.push(DelayRow {
                    pattern: p.label.clone(),
                    subject: d.subject.clone(),
                    repetition: d.repetition,
                    mode: MODES[m].into(),
                    rows: report.rows.len(),
                    mse: report.mse,
                    mae: report.mae,
                });
                let name = format!("{}_{}_r{:02}_{}", p.label, d.subject, d.repetition, MODES[m]);
                run.reports.push((name, report));
            }
        }
        let n = p.held_out.len().max(1) as f64;
        for (m, (mae, mse)) in sums.into_iter().enumerate() {
            run.patterns.push(DelayPatternRow {
                pattern: p.label.clone(),
                mode: MODES[m].into(),
                mae: mae / n,
                mse: mse / n,
            });
        }
    }
    Ok(run)
}

impl DelayRun {
    pub fn pattern_mae(&self, pattern: &str, mode: &str) -> Option<f64> {
        self.patterns
            .iter()
            .find(|r| r.pattern == pattern && r.mode == mode)
            .map(|r| r.mae)
    }
}
