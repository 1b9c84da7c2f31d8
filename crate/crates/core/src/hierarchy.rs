//! The three-layer architecture: GWR₁ quantizes frames, GWR₂ quantizes
//! windows of GWR₁ prototypes, and the predictive layer maps windows of GWR₂
//! prototypes to the ones that follow.
//!
//! Every layer is created lazily from the first two vectors it receives.
//! While a layer is still waiting for its second seed, the vector itself is
//! passed upward in place of a BMU weight.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::data::sequence::MotionSequence;
use crate::encoding::WindowEncoder;
use crate::engine::StepReport;
use crate::error::{GwrError, Result};
use crate::gwr::GwrNetwork;
use crate::params::GwrParams;
use crate::predictive::{PredictiveGwrNetwork, RegressorSample};
use crate::scalar::Scalar;
use crate::snapshot::Lines;

pub const HIERARCHY_FORMAT: &str = "gwrnet-hierarchy";
pub const HIERARCHY_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HierarchyConfig {
    pub frame_dim: usize,
    /// Window length between GWR₁ and GWR₂.
    pub tau1: usize,
    /// Window length between GWR₂ and the predictive layer: regression order
    /// plus output steps.
    pub tau2: usize,
    /// Elements predicted at once; 1 selects recursive prediction.
    pub output_steps: usize,
    pub prediction_horizon: usize,
    /// Layer tables may be partial; missing keys take that layer's defaults.
    #[serde(deserialize_with = "layer0")]
    pub gwr1: GwrParams,
    #[serde(deserialize_with = "layer1")]
    pub gwr2: GwrParams,
    #[serde(deserialize_with = "layer2")]
    pub pgwr: GwrParams,
}

fn layer0<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<GwrParams, D::Error> {
    crate::params::deserialize_layer(0, d)
}

fn layer1<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<GwrParams, D::Error> {
    crate::params::deserialize_layer(1, d)
}

fn layer2<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<GwrParams, D::Error> {
    crate::params::deserialize_layer(2, d)
}

impl Default for HierarchyConfig {
    fn default() -> Self {
        HierarchyConfig {
            frame_dim: crate::data::sequence::FRAME_DIM,
            tau1: 3,
            tau2: 4,
            output_steps: 1,
            prediction_horizon: 6,
            gwr1: GwrParams::for_layer(0),
            gwr2: GwrParams::for_layer(1),
            pgwr: GwrParams::for_layer(2),
        }
    }
}

impl HierarchyConfig {
    pub fn regression_order(&self) -> usize {
        self.tau2.saturating_sub(self.output_steps)
    }

    /// Dimension of GWR₂ weights and of every predictive-layer element.
    pub fn element_dim(&self) -> usize {
        self.tau1 * self.frame_dim
    }

    /// Frames before the first predictive-layer window is complete.
    pub fn min_frames(&self) -> usize {
        self.tau1 + self.tau2 - 1
    }

    /// Frames before the first regressor (without its target) is available.
    pub fn first_forecast_frame(&self) -> usize {
        self.tau1 + self.regression_order() - 2
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(GwrError::InvalidParams(m));
        if self.frame_dim == 0 || self.tau1 == 0 {
            return bad("frame_dim and tau1 must be positive".into());
        }
        if self.output_steps == 0 || self.tau2 <= self.output_steps {
            return bad(format!(
                "tau2 ({}) must exceed output_steps ({}) by at least one regressor element",
                self.tau2, self.output_steps
            ));
        }
        if self.prediction_horizon == 0 {
            return bad("prediction_horizon must be at least 1".into());
        }
        if self.output_steps > 1 && self.prediction_horizon > self.output_steps {
            return bad(format!(
                "vector mode predicts {} steps, horizon {} requested",
                self.output_steps, self.prediction_horizon
            ));
        }
        self.gwr1.validate()?;
        self.gwr2.validate()?;
        self.pgwr.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Slot<N, S> {
    Empty,
    Seeded(S),
    Ready(N),
}

impl<N, S> Slot<N, S> {
    fn ready(&self) -> Option<&N> {
        match self {
            Slot::Ready(n) => Some(n),
            _ => None,
        }
    }
}

/// Per-layer counters for one epoch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LayerEpochStats {
    /// Neurons at the end of the epoch (0 or 1 while still seeding).
    pub neurons: usize,
    pub steps: usize,
    pub inserted: usize,
    pub removed: usize,
    /// Mean BMU distance over the training steps.
    pub mean_distance: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct HierarchyEpochReport {
    /// GWR₁, GWR₂ and the predictive layer.
    pub layers: [LayerEpochStats; 3],
    /// Mean squared one-step error of the predicted frame against the raw
    /// incoming frame, measured before each predictive update.
    pub online_mse: Option<f64>,
    /// The same error per predicted frame, in presentation order.
    pub frame_errors: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingReport {
    pub epochs: Vec<HierarchyEpochReport>,
}

/// Which layers adapt during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainScope {
    All,
    /// GWR₁ and GWR₂ are frozen and only encode.
    PredictorOnly,
}

/// Predictions issued at frame `t` of a segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecast<T> {
    pub t: usize,
    /// Current frame as represented by the lower layers.
    pub current: Vec<T>,
    /// Predicted frames for `t+1 … t+horizon`.
    pub predictions: Vec<Vec<T>>,
}

/// A forecast together with the frames that actually followed.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord<T> {
    pub forecast: Forecast<T>,
    /// Raw frames `t+1 … t+horizon`.
    pub truth: Vec<Vec<T>>,
    /// The same frames as reconstructed by GWR₁ and GWR₂.
    pub quantized: Vec<Vec<T>>,
}

/// Errors at one horizon, averaged over records and frame components.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorStats {
    pub mse: f64,
    pub mae: f64,
    /// Standard deviation of the per-record mean absolute error.
    pub mae_std: f64,
    pub mse_quantized: f64,
    pub mae_quantized: f64,
    pub records: usize,
}

/// Per-horizon error statistics; entry `k - 1` is horizon `k`.
pub fn summarize<T: Scalar>(records: &[EvalRecord<T>], horizon: usize) -> Vec<ErrorStats> {
    (0..horizon)
        .map(|k| {
            let mut s = ErrorStats::default();
            let mut per_record = Vec::with_capacity(records.len());
            let mut components = 0usize;
            for r in records.iter().filter(|r| r.forecast.predictions.len() > k) {
                let p = &r.forecast.predictions[k];
                let mut abs = 0.0;
                for ((&p, &y), &q) in p.iter().zip(&r.truth[k]).zip(&r.quantized[k]) {
                    let e = (p - y).to_f64_lossless();
                    let eq = (p - q).to_f64_lossless();
                    s.mse += e * e;
                    abs += e.abs();
                    s.mse_quantized += eq * eq;
                    s.mae_quantized += eq.abs();
                }
                s.mae += abs;
                components += p.len();
                per_record.push(abs / p.len() as f64);
            }
            s.records = per_record.len();
            if components > 0 {
                let c = components as f64;
                s.mse /= c;
                s.mae /= c;
                s.mse_quantized /= c;
                s.mae_quantized /= c;
                let m = s.mae;
                s.mae_std = (per_record.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
                    / per_record.len() as f64)
                    .sqrt();
            }
            s
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hierarchy<T> {
    config: HierarchyConfig,
    gwr1: Slot<GwrNetwork<T>, Vec<T>>,
    gwr2: Slot<GwrNetwork<T>, Vec<T>>,
    pgwr: Slot<PredictiveGwrNetwork<T>, RegressorSample<T>>,
}

fn record<T: Scalar>(stats: &mut LayerEpochStats, r: &StepReport<T>) {
    stats.steps += 1;
    stats.inserted += usize::from(r.inserted.is_some());
    stats.removed += r.removed_neurons;
    stats.mean_distance += r.distance.to_f64_lossless();
}

/// Trains (or seeds) a GWR layer on `x`; returns the vector passed upward.
fn feed_gwr<T: Scalar>(
    slot: &mut Slot<GwrNetwork<T>, Vec<T>>,
    params: &GwrParams,
    x: &[T],
    learn: bool,
    stats: &mut LayerEpochStats,
) -> Result<Vec<T>> {
    match slot {
        Slot::Ready(net) if learn => {
            let r = net.train_step(x)?;
            record(stats, &r);
            Ok(net.neuron(r.bmu).expect("bmu exists").weight().to_vec())
        }
        Slot::Ready(net) => Ok(net.quantize(x)?.0.to_vec()),
        _ if !learn => Err(GwrError::Uninitialized),
        Slot::Empty => {
            crate::engine::check_vector(x, x.len())?;
            *slot = Slot::Seeded(x.to_vec());
            Ok(x.to_vec())
        }
        Slot::Seeded(first) => {
            let net = GwrNetwork::init(first, x, *params)?;
            *slot = Slot::Ready(net);
            Ok(x.to_vec())
        }
    }
}

fn layer_size<N, S>(slot: &Slot<N, S>, len: impl Fn(&N) -> usize) -> usize {
    match slot {
        Slot::Empty => 0,
        Slot::Seeded(_) => 1,
        Slot::Ready(n) => len(n),
    }
}

impl<T: Scalar> Hierarchy<T> {
    pub fn new(config: HierarchyConfig) -> Result<Self> {
        config.validate()?;
        Ok(Hierarchy {
            config,
            gwr1: Slot::Empty,
            gwr2: Slot::Empty,
            pgwr: Slot::Empty,
        })
    }

    pub fn config(&self) -> &HierarchyConfig {
        &self.config
    }

    pub fn gwr1(&self) -> Option<&GwrNetwork<T>> {
        self.gwr1.ready()
    }

    pub fn gwr2(&self) -> Option<&GwrNetwork<T>> {
        self.gwr2.ready()
    }

    pub fn predictor(&self) -> Option<&PredictiveGwrNetwork<T>> {
        self.pgwr.ready()
    }

    pub fn is_trained(&self) -> bool {
        self.gwr1().is_some() && self.gwr2().is_some() && self.predictor().is_some()
    }

    /// Neuron counts of the three layers.
    pub fn neuron_counts(&self) -> [usize; 3] {
        [
            layer_size(&self.gwr1, GwrNetwork::len),
            layer_size(&self.gwr2, GwrNetwork::len),
            layer_size(&self.pgwr, PredictiveGwrNetwork::len),
        ]
    }

    /// Discards the predictive layer and restarts it with `params`; the
    /// lower layers are kept.
    pub fn replace_predictor(&mut self, params: GwrParams) -> Result<()> {
        params.validate()?;
        self.config.pgwr = params;
        self.pgwr = Slot::Empty;
        Ok(())
    }

    fn encoders(&self) -> Result<(WindowEncoder<T>, WindowEncoder<T>)> {
        Ok((
            WindowEncoder::new(self.config.tau1, self.config.frame_dim)?,
            WindowEncoder::new(self.config.tau2, self.config.element_dim())?,
        ))
    }

    /// One pass over a contiguous run of frames. Encoders start empty.
    fn train_segment<S: AsRef<[T]>>(
        &mut self,
        frames: &[S],
        scope: TrainScope,
        report: &mut HierarchyEpochReport,
    ) -> Result<()> {
        let (mut enc1, mut enc2) = self.encoders()?;
        let learn_lower = scope == TrainScope::All;
        let fd = self.config.frame_dim;
        for frame in frames {
            let frame = frame.as_ref();
            crate::engine::check_vector(frame, fd)?;
            let [s1, s2, s3] = &mut report.layers;
            let w1 = feed_gwr(&mut self.gwr1, &self.config.gwr1, frame, learn_lower, s1)?;
            let Some(o1) = enc1.push(&w1)? else { continue };
            let w2 = feed_gwr(&mut self.gwr2, &self.config.gwr2, &o1, learn_lower, s2)?;
            let Some(o2) = enc2.push(&w2)? else { continue };
            let sample = crate::predictive::split_window(
                &o2,
                self.config.regression_order(),
                self.config.output_steps,
                self.config.element_dim(),
            )?;
            match &mut self.pgwr {
                Slot::Ready(net) => {
                    if self.config.output_steps == 1 {
                        let pred = net.predict_one(&sample.x_in)?;
                        let se: f64 = pred[..fd]
                            .iter()
                            .zip(frame)
                            .map(|(&p, &y)| (p - y).to_f64_lossless().powi(2))
                            .sum();
                        report.frame_errors.push(se / fd as f64);
                    }
                    let r = net.train_step(&sample)?;
                    record(s3, &r);
                }
                Slot::Empty => self.pgwr = Slot::Seeded(sample),
                Slot::Seeded(first) => {
                    let net = PredictiveGwrNetwork::init(
                        first,
                        &sample,
                        self.config.regression_order(),
                        self.config.element_dim(),
                        self.config.output_steps,
                        self.config.pgwr,
                    )?;
                    self.pgwr = Slot::Ready(net);
                }
            }
        }
        Ok(())
    }

    /// Trains on every contiguous segment of `seq` for `epochs` passes.
    pub fn train_sequence(&mut self, seq: &MotionSequence<T>, epochs: usize) -> Result<TrainingReport> {
        self.train_sequence_scoped(seq, epochs, TrainScope::All)
    }

    pub fn train_sequence_scoped(
        &mut self,
        seq: &MotionSequence<T>,
        epochs: usize,
        scope: TrainScope,
    ) -> Result<TrainingReport> {
        let segments = seq.segments();
        self.train_segments(&segments, epochs, scope)
    }

    /// Trains on contiguous frame runs; each run restarts the encoders.
    pub fn train_segments<S: AsRef<[T]>>(
        &mut self,
        segments: &[&[S]],
        epochs: usize,
        scope: TrainScope,
    ) -> Result<TrainingReport> {
        let total: usize = segments.iter().map(|s| s.len()).sum();
        if total < self.config.min_frames() {
            return Err(GwrError::SequenceTooShort {
                needed: self.config.min_frames(),
                actual: total,
            });
        }
        if scope == TrainScope::PredictorOnly && (self.gwr1().is_none() || self.gwr2().is_none()) {
            return Err(GwrError::Uninitialized);
        }
        let mut report = TrainingReport::default();
        for _ in 0..epochs {
            let mut epoch = HierarchyEpochReport::default();
            for seg in segments {
                self.train_segment(seg, scope, &mut epoch)?;
            }
            let counts = self.neuron_counts();
            for (stats, n) in epoch.layers.iter_mut().zip(counts) {
                stats.neurons = n;
                if stats.steps > 0 {
                    stats.mean_distance /= stats.steps as f64;
                }
            }
            let n = epoch.frame_errors.len();
            epoch.online_mse = (n > 0).then(|| epoch.frame_errors.iter().sum::<f64>() / n as f64);
            report.epochs.push(epoch);
        }
        Ok(report)
    }

    /// GWR₂ reconstruction of every frame with frozen lower layers; `None`
    /// during the warm-up of the first window.
    pub fn encode_segment<S: AsRef<[T]>>(&self, frames: &[S]) -> Result<Vec<Option<Vec<T>>>> {
        let g1 = self.gwr1().ok_or(GwrError::Uninitialized)?;
        let g2 = self.gwr2().ok_or(GwrError::Uninitialized)?;
        let mut enc1 = WindowEncoder::new(self.config.tau1, self.config.frame_dim)?;
        frames
            .iter()
            .map(|f| {
                let (w1, _) = g1.quantize(f.as_ref())?;
                Ok(match enc1.push(w1)? {
                    Some(o1) => Some(g2.quantize(&o1)?.0.to_vec()),
                    None => None,
                })
            })
            .collect()
    }

    /// Forecasts from every frame of a segment that has a complete regressor.
    pub fn forecast_segment<S: AsRef<[T]>>(&self, frames: &[S], horizon: usize) -> Result<Vec<Forecast<T>>> {
        let net = self.predictor().ok_or(GwrError::Uninitialized)?;
        if horizon == 0 {
            return Err(GwrError::InvalidParams("horizon must be at least 1".into()));
        }
        if net.output_steps() > 1 && horizon > net.output_steps() {
            return Err(GwrError::InvalidParams(format!(
                "vector mode predicts {} steps, horizon {horizon} requested",
                net.output_steps()
            )));
        }
        let q = self.encode_segment(frames)?;
        let p = net.regressor_order();
        let fd = self.config.frame_dim;
        let mut out = Vec::new();
        for t in self.config.first_forecast_frame()..frames.len() {
            let mut x_in = Vec::with_capacity(net.input_dim());
            for j in 0..p {
                x_in.extend_from_slice(q[t - j].as_ref().expect("warm-up covers the regressor"));
            }
            let elements = if net.output_steps() == 1 {
                net.predict_recursive(&x_in, horizon)?
            } else {
                net.predict_vector(&x_in)?
            };
            out.push(Forecast {
                t,
                current: q[t].as_ref().expect("encoded")[..fd].to_vec(),
                predictions: elements.into_iter().take(horizon).map(|e| e[..fd].to_vec()).collect(),
            });
        }
        Ok(out)
    }

    /// Forecasts paired with the frames that followed. Near the end of the
    /// segment a record keeps only the horizons that still have a true frame,
    /// so every horizon `k` is scored on all frames `t` with `t + k` inside.
    pub fn evaluate_segment<S: AsRef<[T]>>(&self, frames: &[S], horizon: usize) -> Result<Vec<EvalRecord<T>>> {
        let fd = self.config.frame_dim;
        let q = self.encode_segment(frames)?;
        let forecasts = self.forecast_segment(frames, horizon)?;
        Ok(forecasts
            .into_iter()
            .filter(|f| f.t + 1 < frames.len())
            .map(|mut f| {
                let last = (f.t + horizon).min(frames.len() - 1);
                f.predictions.truncate(last - f.t);
                let range = f.t + 1..=last;
                EvalRecord {
                    truth: range.clone().map(|i| frames[i].as_ref().to_vec()).collect(),
                    quantized: range
                        .map(|i| q[i].as_ref().expect("encoded")[..fd].to_vec())
                        .collect(),
                    forecast: f,
                }
            })
            .collect())
    }

    /// [`evaluate_segment`](Self::evaluate_segment) over every segment of a sequence.
    pub fn evaluate_sequence(&self, seq: &MotionSequence<T>, horizon: usize) -> Result<Vec<EvalRecord<T>>> {
        let mut out = Vec::new();
        for seg in seq.segments() {
            if seg.len() > self.config.first_forecast_frame() {
                out.extend(self.evaluate_segment(seg, horizon)?);
            }
        }
        Ok(out)
    }

    pub fn to_snapshot(&self) -> Result<String> {
        let (Some(g1), Some(g2), Some(pg)) = (self.gwr1(), self.gwr2(), self.predictor()) else {
            return Err(GwrError::Uninitialized);
        };
        let c = &self.config;
        let mut out = String::new();
        let _ = writeln!(out, "{HIERARCHY_FORMAT} {HIERARCHY_FORMAT_VERSION}");
        let _ = writeln!(out, "frame_dim {}", c.frame_dim);
        let _ = writeln!(out, "tau1 {}", c.tau1);
        let _ = writeln!(out, "tau2 {}", c.tau2);
        let _ = writeln!(out, "output_steps {}", c.output_steps);
        let _ = writeln!(out, "prediction_horizon {}", c.prediction_horizon);
        out.push_str("layer gwr1\n");
        out.push_str(&g1.to_snapshot());
        out.push_str("layer gwr2\n");
        out.push_str(&g2.to_snapshot());
        out.push_str("layer pgwr\n");
        pg.write_to(&mut out);
        out.push_str("end hierarchy\n");
        Ok(out)
    }

    pub fn from_snapshot(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        let magic = lines.next_line()?;
        let expected = format!("{HIERARCHY_FORMAT} {HIERARCHY_FORMAT_VERSION}");
        if magic != expected {
            return Err(lines.error(format!("expected `{expected}`, found `{magic}`")));
        }
        let frame_dim = lines.keyed_parse("frame_dim")?;
        let tau1 = lines.keyed_parse("tau1")?;
        let tau2 = lines.keyed_parse("tau2")?;
        let output_steps = lines.keyed_parse("output_steps")?;
        let prediction_horizon = lines.keyed_parse("prediction_horizon")?;
        let layer = |name: &str, lines: &mut Lines<'_>| -> Result<()> {
            let found = lines.keyed("layer")?;
            if found != name {
                return Err(lines.error(format!("expected layer `{name}`, found `{found}`")));
            }
            Ok(())
        };
        layer("gwr1", &mut lines)?;
        let g1 = GwrNetwork::read_from(&mut lines)?;
        layer("gwr2", &mut lines)?;
        let g2 = GwrNetwork::read_from(&mut lines)?;
        layer("pgwr", &mut lines)?;
        let pg = PredictiveGwrNetwork::read_from(&mut lines)?;
        if lines.next_line()? != "end hierarchy" || !lines.peek_done() {
            return Err(lines.error("expected `end hierarchy` at the end of the archive"));
        }
        let config = HierarchyConfig {
            frame_dim,
            tau1,
            tau2,
            output_steps,
            prediction_horizon,
            gwr1: *g1.params(),
            gwr2: *g2.params(),
            pgwr: *pg.params(),
        };
        config.validate().map_err(|e| lines.error(e.to_string()))?;
        let dims_ok = g1.input_dim() == frame_dim
            && g2.input_dim() == config.element_dim()
            && pg.element_dim() == config.element_dim()
            && pg.regressor_order() == config.regression_order()
            && pg.output_steps() == output_steps;
        if !dims_ok {
            return Err(lines.error("layer dimensions do not chain"));
        }
        Ok(Hierarchy {
            config,
            gwr1: Slot::Ready(g1),
            gwr2: Slot::Ready(g2),
            pgwr: Slot::Ready(pg),
        })
    }
}
