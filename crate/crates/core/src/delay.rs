//! Choosing motor commands that compensate a sensorimotor delay.
//!
//! At frame `t` the hierarchy provides a buffer `P(t+0) … P(t+h)`, where
//! `P(t+0)` is the current pose as represented by the lower layers. A command
//! issued now is executed after the delay, so the pipeline commands the
//! prediction for the execution time and scores it against the raw frame
//! that is actually due then.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::sequence::MotionSequence;
use crate::error::{GwrError, Result};
use crate::hierarchy::Hierarchy;
use crate::scalar::{squared_distance, Scalar};
use crate::snapshot::format_real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayModel {
    pub latency_ms: f64,
    /// Upper bound of the uniform extra delay.
    pub jitter_ms: f64,
    pub frame_period_ms: f64,
}

impl DelayModel {
    pub fn new(latency_ms: f64, jitter_ms: f64, frame_period_ms: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(latency_ms) || !ok(jitter_ms) || !(frame_period_ms.is_finite() && frame_period_ms > 0.0) {
            return Err(GwrError::InvalidParams(format!(
                "invalid delay model: latency {latency_ms} ms, jitter {jitter_ms} ms, period {frame_period_ms} ms"
            )));
        }
        Ok(DelayModel {
            latency_ms,
            jitter_ms,
            frame_period_ms,
        })
    }

    /// Frames of look-ahead covering the worst-case delay.
    pub fn horizon_frames(&self) -> usize {
        // Guard against 600 / 100 landing a hair above 6.
        ((self.latency_ms + self.jitter_ms) / self.frame_period_ms - 1e-9).ceil().max(0.0) as usize
    }

    /// Draws one delay in milliseconds.
    pub fn sample_ms<R: Rng>(&self, rng: &mut R) -> f64 {
        if self.jitter_ms > 0.0 {
            self.latency_ms + rng.random_range(0.0..=self.jitter_ms)
        } else {
            self.latency_ms
        }
    }
}

/// `P(t+0) … P(t+h)` issued at frame `base_time`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionBuffer<T> {
    pub base_time: usize,
    pub predictions: Vec<Vec<T>>,
}

impl<T: Scalar> PredictionBuffer<T> {
    pub fn horizon(&self) -> usize {
        self.predictions.len().saturating_sub(1)
    }

    /// Pose expected `steps` frames ahead, linear between buffer entries.
    pub fn interpolate(&self, steps: f64) -> Vec<T> {
        let last = self.horizon() as f64;
        let s = steps.clamp(0.0, last);
        let lo = s.floor() as usize;
        let hi = s.ceil() as usize;
        if lo == hi {
            return self.predictions[lo].clone();
        }
        let w = T::lit(s - lo as f64);
        self.predictions[lo]
            .iter()
            .zip(&self.predictions[hi])
            .map(|(&a, &b)| a + (b - a) * w)
            .collect()
    }
}

/// The buffer entry nearest to the expected configuration `j`; equal
/// distances go to the smaller index.
pub fn select_command<'b, T: Scalar>(j: &[T], buffer: &'b PredictionBuffer<T>) -> Result<(&'b [T], usize)> {
    let first = buffer.predictions.first().ok_or(GwrError::Empty("prediction buffer"))?;
    crate::engine::check_vector(j, first.len())?;
    let mut best = (0, T::infinity());
    for (i, p) in buffer.predictions.iter().enumerate() {
        crate::engine::check_vector(p, j.len())?;
        let d = squared_distance(j, p);
        if d < best.1 {
            best = (i, d);
        }
    }
    Ok((&buffer.predictions[best.0], best.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PipelineMode {
    /// Command `P(t + horizon_frames)`.
    Fixed,
    /// Draw a delay per frame and choose the command by [`select_command`].
    Variable { seed: u64 },
    /// No prediction: command the current represented pose.
    Baseline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LagRow<T> {
    /// Original index of the frame at which the command is issued.
    pub frame_index: u64,
    pub chosen_index: usize,
    pub command: Vec<T>,
    pub truth: Vec<T>,
    /// Mean absolute difference between command and truth, radians.
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LagReport<T> {
    pub rows: Vec<LagRow<T>>,
    pub mse: f64,
    pub mae: f64,
}

impl<T: Scalar> LagReport<T> {
    fn from_rows(rows: Vec<LagRow<T>>) -> Self {
        let (mut se, mut ae, mut n) = (0.0, 0.0, 0usize);
        for r in &rows {
            for (&c, &y) in r.command.iter().zip(&r.truth) {
                let e = (c - y).to_f64_lossless();
                se += e * e;
                ae += e.abs();
            }
            n += r.command.len();
        }
        let n = n.max(1) as f64;
        LagReport {
            rows,
            mse: se / n,
            mae: ae / n,
        }
    }

    /// CSV with columns `frame_index,chosen_index,cmd_0..,truth_0..,abs_error`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let dim = self.rows.first().map_or(0, |r| r.command.len());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["frame_index".to_string(), "chosen_index".to_string()];
        header.extend((0..dim).map(|k| format!("cmd_{k}")));
        header.extend((0..dim).map(|k| format!("truth_{k}")));
        header.push("abs_error".into());
        let io = |e: csv::Error| GwrError::Io(e.to_string());
        w.write_record(&header).map_err(io)?;
        for r in &self.rows {
            let mut rec = vec![r.frame_index.to_string(), r.chosen_index.to_string()];
            rec.extend(r.command.iter().map(|&v| format_real(v)));
            rec.extend(r.truth.iter().map(|&v| format_real(v)));
            rec.push(format_real(r.abs_error));
            w.write_record(&rec).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Streams `seq` through a trained hierarchy and scores every command
/// against the raw frame due at its execution time. Frames whose execution
/// time falls past the end of their segment are skipped.
pub fn run_pipeline<T: Scalar>(
    hierarchy: &Hierarchy<T>,
    seq: &MotionSequence<T>,
    delay: &DelayModel,
    mode: PipelineMode,
) -> Result<LagReport<T>> {
    if !hierarchy.is_trained() {
        return Err(GwrError::Uninitialized);
    }
    let h = delay.horizon_frames();
    let needed = hierarchy.config().first_forecast_frame() + 1;
    if seq.segments().iter().all(|s| s.len() < needed + h) {
        return Err(GwrError::SequenceTooShort {
            needed: needed + h,
            actual: seq.segments().iter().map(|s| s.len()).max().unwrap_or(0),
        });
    }
    let mut rng = match mode {
        PipelineMode::Variable { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut rows = Vec::new();
    let mut offset = 0;
    for seg in seq.segments() {
        let seg_offset = offset;
        offset += seg.len();
        if seg.len() < needed {
            continue;
        }
        for f in hierarchy.forecast_segment(seg, h.max(1))? {
            let mut predictions = Vec::with_capacity(h + 1);
            predictions.push(f.current);
            predictions.extend(f.predictions.into_iter().take(h));
            let buffer = PredictionBuffer {
                base_time: f.t,
                predictions,
            };
            let (index, due) = match (&mode, rng.as_mut()) {
                (PipelineMode::Variable { .. }, Some(rng)) => {
                    let steps = delay.sample_ms(rng) / delay.frame_period_ms;
                    let expected = buffer.interpolate(steps);
                    let (_, i) = select_command(&expected, &buffer)?;
                    (i, (steps - 1e-9).ceil().max(0.0) as usize)
                }
                (PipelineMode::Baseline, _) => (0, h),
                _ => (h, h),
            };
            let Some(truth) = seg.get(f.t + due) else { continue };
            let command = buffer.predictions[index].clone();
            let abs_error = command
                .iter()
                .zip(truth.iter())
                .map(|(&c, &y)| (c - y).abs().to_f64_lossless())
                .sum::<f64>()
                / command.len() as f64;
            rows.push(LagRow {
                frame_index: seq.indices()[seg_offset + f.t],
                chosen_index: index,
                command,
                truth: truth.to_vec(),
                abs_error,
            });
        }
    }
    Ok(LagReport::from_rows(rows))
}
