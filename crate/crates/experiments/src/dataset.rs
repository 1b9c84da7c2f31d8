//! Demonstrations grouped by pattern and split into training, evaluation and
//! held-out sets.

use std::collections::BTreeSet;

use gwrnet::data::{self, generate_synthetic, MotionSequence, SyntheticSpec};

use crate::config::{DataSource, DatasetConfig};
use crate::error::{HarnessError, Result};
use crate::seeds::derive_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct Demo {
    pub subject: String,
    pub repetition: u32,
    pub sequence: MotionSequence<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternData {
    pub label: String,
    pub train: Vec<Demo>,
    /// Subset of `train` scored after every epoch.
    pub eval: Vec<Demo>,
    pub held_out: Vec<Demo>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub patterns: Vec<PatternData>,
}

impl Dataset {
    pub fn build(config: &DatasetConfig, seed: u64) -> Result<Self> {
        let demos = match config.source {
            DataSource::Synthetic => synthetic_demos(config, seed)?,
            DataSource::Files => file_demos(config)?,
        };
        let labels: Vec<String> = if !config.patterns.is_empty() {
            config.patterns.clone()
        } else if config.source == DataSource::Synthetic {
            config.pattern_list()?.iter().map(|p| p.label()).collect()
        } else {
            let mut seen: Vec<String> = Vec::new();
            for (label, _) in &demos {
                if !seen.contains(label) {
                    seen.push(label.clone());
                }
            }
            seen
        };
        let mut patterns = Vec::with_capacity(labels.len());
        for label in labels {
            let mine: Vec<Demo> = demos.iter().filter(|(l, _)| *l == label).map(|(_, d)| d.clone()).collect();
            if mine.is_empty() {
                return Err(HarnessError::Dataset(format!("no demonstrations of {label}")));
            }
            patterns.push(split(label, mine, config)?);
        }
        Ok(Dataset { patterns })
    }

    pub fn labels(&self) -> Vec<&str> {
        self.patterns.iter().map(|p| p.label.as_str()).collect()
    }

    /// Every demonstration with its repetition number, for writing to disk.
    pub fn all_demos(&self) -> Vec<(MotionSequence<f64>, u32)> {
        let mut out: Vec<(MotionSequence<f64>, u32)> = Vec::new();
        for p in &self.patterns {
            for d in p.train.iter().chain(&p.held_out) {
                out.push((d.sequence.clone(), d.repetition));
            }
        }
        out
    }
}

fn synthetic_demos(config: &DatasetConfig, seed: u64) -> Result<Vec<(String, Demo)>> {
    let mut out = Vec::new();
    for (pi, pattern) in config.pattern_list()?.into_iter().enumerate() {
        for subject in 0..config.subjects {
            for rep in 0..config.repetitions {
                let spec = SyntheticSpec {
                    pattern,
                    subject_jitter: config.subject_jitter,
                    noise_std: config.noise_std,
                    duration_s: config.duration_s,
                    fps: config.fps,
                    subject,
                    seed: derive_seed(seed, "demo", &[pi as u64, subject as u64, rep as u64]),
                };
                let sequence = generate_synthetic(&spec)?;
                out.push((
                    pattern.label(),
                    Demo {
                        subject: sequence.subject_id.clone(),
                        repetition: rep,
                        sequence,
                    },
                ));
            }
        }
    }
    Ok(out)
}

fn file_demos(config: &DatasetConfig) -> Result<Vec<(String, Demo)>> {
    let dir = config
        .path
        .as_ref()
        .ok_or_else(|| HarnessError::Config("dataset.path is required for files".into()))?;
    Ok(data::load_dataset::<f64>(dir)?
        .into_iter()
        .map(|(entry, sequence)| {
            (
                entry.pattern,
                Demo {
                    subject: entry.subject,
                    repetition: entry.repetition,
                    sequence,
                },
            )
        })
        .collect())
}

/// The highest `held_out_repetitions` repetition numbers of a pattern are
/// held out; the lowest `eval_repetitions` of the rest are scored.
fn split(label: String, demos: Vec<Demo>, config: &DatasetConfig) -> Result<PatternData> {
    let reps: BTreeSet<u32> = demos.iter().map(|d| d.repetition).collect();
    let reps: Vec<u32> = reps.into_iter().collect();
    let held = config.held_out_repetitions as usize;
    if held >= reps.len() {
        return Err(HarnessError::Dataset(format!(
            "{label}: {} repetitions cannot hold out {held}",
            reps.len()
        )));
    }
    let train_reps = &reps[..reps.len() - held];
    let eval_reps = &train_reps[..(config.eval_repetitions as usize).min(train_reps.len())];
    let (mut train, mut eval, mut held_out) = (Vec::new(), Vec::new(), Vec::new());
    for d in demos {
        if !train_reps.contains(&d.repetition) {
            held_out.push(d);
            continue;
        }
        if eval_reps.contains(&d.repetition) {
            eval.push(d.clone());
        }
        train.push(d);
    }
    Ok(PatternData {
        label,
        train,
        eval,
        held_out,
    })
}
