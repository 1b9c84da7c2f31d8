//! Experiment configuration, read from TOML.
//!
//! Every field has a default, so an empty file is a valid configuration.
//! Unknown keys are rejected.
//!
//! ```toml
//! seed = 7
//! epochs_per_sequence = 50
//! presentation_orders = 5
//! eval_horizon = 1
//! output_dir = "runs/default"
//!
//! [dataset]
//! source = "synthetic"        # or "files", with `path` pointing at a dataset directory
//! subjects = 3
//! repetitions = 10
//! held_out_repetitions = 1
//!
//! [hierarchy]
//! tau1 = 3
//! tau2 = 4
//! pgwr = { activation_threshold = 0.98 }
//!
//! [sweep]
//! activation_thresholds = [0.5, 0.7, 0.9, 0.99]
//!
//! [delay]
//! latency_ms = 600.0
//! jitter_ms = 200.0
//! ```

use std::path::{Path, PathBuf};

use gwrnet::data::{Pattern, DEFAULT_CHUNK_FRAMES, DEFAULT_FPS, DEFAULT_SUITE, MAX_LOSS_FRACTION};
use gwrnet::HierarchyConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Base seed; every random choice of a run is derived from it.
    pub seed: u64,
    pub epochs_per_sequence: usize,
    /// Random pattern orders averaged by the incremental run.
    pub presentation_orders: usize,
    /// Frames ahead scored by C.P.E., P.E. and the sweeps.
    pub eval_horizon: usize,
    /// Where a run writes; not part of the canonical form, so moving a run
    /// does not change its hash.
    #[serde(skip_serializing)]
    pub output_dir: PathBuf,
    pub dataset: DatasetConfig,
    pub hierarchy: HierarchyConfig,
    pub sweep: SweepConfig,
    pub delay: DelayConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 7,
            epochs_per_sequence: 50,
            presentation_orders: 5,
            eval_horizon: 1,
            output_dir: PathBuf::from("runs"),
            dataset: DatasetConfig::default(),
            hierarchy: HierarchyConfig::default(),
            sweep: SweepConfig::default(),
            delay: DelayConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataSource {
    Synthetic,
    Files,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub source: DataSource,
    /// Dataset directory with a manifest, for `source = "files"`.
    pub path: Option<PathBuf>,
    /// Pattern labels in presentation order. Empty means the whole synthetic
    /// suite, or every pattern of the manifest in first-seen order.
    pub patterns: Vec<String>,
    pub subjects: u32,
    pub repetitions: u32,
    /// Last repetitions of every subject, kept out of training.
    pub held_out_repetitions: u32,
    /// First repetitions of every subject scored after each epoch.
    pub eval_repetitions: u32,
    pub duration_s: f64,
    pub fps: f64,
    pub noise_std: f64,
    pub subject_jitter: f64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            source: DataSource::Synthetic,
            path: None,
            patterns: Vec::new(),
            subjects: 3,
            repetitions: 10,
            held_out_repetitions: 1,
            eval_repetitions: 1,
            duration_s: 20.0,
            fps: DEFAULT_FPS,
            noise_std: 0.002,
            subject_jitter: 0.3,
        }
    }
}

impl DatasetConfig {
    pub fn pattern_list(&self) -> Result<Vec<Pattern>> {
        if self.patterns.is_empty() {
            return Ok(DEFAULT_SUITE.to_vec());
        }
        self.patterns
            .iter()
            .map(|p| p.parse().map_err(|e: gwrnet::GwrError| HarnessError::Config(e.to_string())))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub activation_thresholds: Vec<f64>,
    pub horizons: Vec<usize>,
    pub loss_fractions: Vec<f64>,
    pub loss_chunk_frames: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            activation_thresholds: vec![0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99],
            horizons: (1..=20).collect(),
            loss_fractions: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95],
            loss_chunk_frames: DEFAULT_CHUNK_FRAMES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DelayConfig {
    pub latency_ms: f64,
    /// Extra delay drawn uniformly from `[0, jitter_ms]` in variable mode.
    pub jitter_ms: f64,
}

impl Default for DelayConfig {
    fn default() -> Self {
        DelayConfig {
            latency_ms: 600.0,
            jitter_ms: 200.0,
        }
    }
}

/// The experiments a configuration can drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Incremental,
    ActivationSweep,
    HorizonSweep,
    LossSweep,
    Delay,
    GenerateData,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Canonical form: every field that affects results.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML form, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn validate(&self, experiment: Experiment) -> Result<()> {
        let fail = |m: String| Err(HarnessError::Config(m));
        self.hierarchy.validate()?;
        if self.epochs_per_sequence == 0 {
            return fail("epochs_per_sequence must be at least 1".into());
        }
        if self.eval_horizon == 0 {
            return fail("eval_horizon must be at least 1".into());
        }
        let d = &self.dataset;
        match d.source {
            DataSource::Synthetic => {
                d.pattern_list()?;
                if d.subjects == 0 || d.repetitions == 0 {
                    return fail("synthetic dataset needs subjects and repetitions".into());
                }
                if d.held_out_repetitions >= d.repetitions {
                    return fail("held_out_repetitions must leave training repetitions".into());
                }
                if !(d.duration_s > 0.0 && d.fps > 0.0 && d.noise_std >= 0.0) {
                    return fail("duration_s and fps must be positive, noise_std nonnegative".into());
                }
                if !(0.0..=1.0).contains(&d.subject_jitter) {
                    return fail(format!("subject_jitter {} outside [0, 1]", d.subject_jitter));
                }
            }
            DataSource::Files if d.path.is_none() => return fail("dataset.path is required for files".into()),
            DataSource::Files => {}
        }
        if d.eval_repetitions == 0 {
            return fail("eval_repetitions must be at least 1".into());
        }
        match experiment {
            Experiment::Incremental if self.presentation_orders == 0 => {
                fail("presentation_orders must be at least 1".into())
            }
            Experiment::ActivationSweep => {
                if self.sweep.activation_thresholds.is_empty() {
                    return fail("sweep.activation_thresholds is empty".into());
                }
                for &a in &self.sweep.activation_thresholds {
                    self.hierarchy.pgwr.with_activation_threshold(a).validate()?;
                }
                Ok(())
            }
            Experiment::HorizonSweep => {
                if self.sweep.horizons.is_empty() || self.sweep.horizons.contains(&0) {
                    return fail("sweep.horizons must be nonempty and positive".into());
                }
                Ok(())
            }
            Experiment::LossSweep => {
                if self.sweep.loss_fractions.is_empty() {
                    return fail("sweep.loss_fractions is empty".into());
                }
                if let Some(f) = self
                    .sweep
                    .loss_fractions
                    .iter()
                    .find(|f| !(0.0..=MAX_LOSS_FRACTION).contains(*f))
                {
                    return fail(format!("loss fraction {f} outside [0, {MAX_LOSS_FRACTION}]"));
                }
                if self.sweep.loss_chunk_frames == 0 {
                    return fail("sweep.loss_chunk_frames must be positive".into());
                }
                Ok(())
            }
            Experiment::Delay => {
                let fp = 1000.0 / d.fps;
                gwrnet::DelayModel::new(self.delay.latency_ms, self.delay.jitter_ms, fp)?;
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!(c.epochs_per_sequence, 50);
        assert_eq!(c.sweep.horizons.len(), 20);
        assert_eq!(c.sweep.loss_fractions.len(), 11);
        assert_eq!(c.dataset.pattern_list().unwrap().len(), 10);
    }

    #[test]
    fn round_trips_through_toml() {
        let mut c = ExperimentConfig::default();
        c.seed = 99;
        c.hierarchy.pgwr.activation_threshold = 0.9;
        c.dataset.patterns = vec!["wave-left".into()];
        let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        assert_ne!(ExperimentConfig::default().hash(), c.hash());
        let moved = ExperimentConfig {
            output_dir: "elsewhere".into(),
            ..c.clone()
        };
        assert_eq!(moved.hash(), c.hash());
        assert!(!c.to_toml().contains("output_dir"));
    }

    #[test]
    fn partial_tables_keep_defaults() {
        let c = ExperimentConfig::from_toml("[hierarchy]\ntau2 = 5\n[hierarchy.pgwr]\nactivation_threshold = 0.9\n").unwrap();
        assert_eq!(c.hierarchy.tau2, 5);
        assert_eq!(c.hierarchy.pgwr.activation_threshold, 0.9);
        assert_eq!(c.hierarchy.pgwr.max_edge_age, 300);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
        let mut c = ExperimentConfig::default();
        c.sweep.activation_thresholds.clear();
        assert!(c.validate(Experiment::ActivationSweep).is_err());
        assert!(c.validate(Experiment::HorizonSweep).is_ok());
        c.epochs_per_sequence = 0;
        assert!(c.validate(Experiment::HorizonSweep).is_err());

        let mut c = ExperimentConfig::default();
        c.sweep.loss_fractions = vec![0.0, 0.99];
        assert!(c.validate(Experiment::LossSweep).is_err());
        c.dataset.patterns = vec!["juggle".into()];
        assert!(c.validate(Experiment::Incremental).is_err());
        let mut c = ExperimentConfig::default();
        c.dataset.source = DataSource::Files;
        assert!(c.validate(Experiment::Incremental).is_err());
    }
}
