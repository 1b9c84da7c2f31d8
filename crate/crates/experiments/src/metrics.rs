//! C.P.E. and P.E.
//!
//! Squared errors are averaged over frames, joint components and predicted
//! horizons within a pattern, then over patterns with equal weight. C.P.E.
//! compares predictions with the recorded frames; P.E. compares them with
//! the same frames as reconstructed by GWR₁ and GWR₂, which removes the
//! quantization error of the lower layers.

use gwrnet::hierarchy::EvalRecord;
use gwrnet::Hierarchy64;
use serde::Serialize;

use crate::dataset::Demo;
use crate::error::Result;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PatternError {
    pub mse: f64,
    /// MSE against the quantized reconstruction.
    pub pe: f64,
    pub mae: f64,
    /// Scored (frame, horizon) pairs.
    pub predictions: usize,
}

/// Errors pooled over every record and every horizon up to `horizon`.
pub fn pooled_error(records: &[EvalRecord<f64>]) -> PatternError {
    let (mut se, mut sq, mut ae, mut n, mut count) = (0.0, 0.0, 0.0, 0usize, 0usize);
    for r in records {
        for ((p, y), q) in r.forecast.predictions.iter().zip(&r.truth).zip(&r.quantized) {
            for ((&p, &y), &q) in p.iter().zip(y).zip(q) {
                se += (p - y) * (p - y);
                sq += (p - q) * (p - q);
                ae += (p - y).abs();
            }
            n += p.len();
            count += 1;
        }
    }
    if n == 0 {
        return PatternError::default();
    }
    let n = n as f64;
    PatternError {
        mse: se / n,
        pe: sq / n,
        mae: ae / n,
        predictions: count,
    }
}

pub fn pattern_error(h: &Hierarchy64, demos: &[Demo], horizon: usize) -> Result<PatternError> {
    let mut records = Vec::new();
    for d in demos {
        records.extend(h.evaluate_sequence(&d.sequence, horizon)?);
    }
    Ok(pooled_error(&records))
}

/// Equal-weight mean of the pattern MSEs and P.E.s: `(C.P.E., P.E.)`.
pub fn cumulative(errors: &[PatternError]) -> (f64, f64) {
    if errors.is_empty() {
        return (0.0, 0.0);
    }
    let n = errors.len() as f64;
    (
        errors.iter().map(|e| e.mse).sum::<f64>() / n,
        errors.iter().map(|e| e.pe).sum::<f64>() / n,
    )
}

/// State of an incremental run after one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub order: usize,
    /// 1-based over the whole run.
    pub epoch: usize,
    /// 0-based position of the pattern being trained.
    pub block: usize,
    /// 1-based within the block.
    pub epoch_in_block: usize,
    pub pattern: String,
    /// MSE of every pattern introduced so far, in introduction order.
    pub sequence_mse: Vec<f64>,
    pub sequence_pe: Vec<f64>,
    pub cpe: f64,
    pub pe: f64,
    pub neurons: [usize; 3],
    /// Training steps per layer during this epoch.
    pub steps: [usize; 3],
    /// Prequential one-step MSE seen while training this epoch.
    pub online_mse: Option<f64>,
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

/// Frames until the per-frame error first drops below twice the median of
/// `converged`. `None` when it never does.
pub fn frames_to_adapt(errors: &[f64], converged: &[f64]) -> Option<usize> {
    let limit = 2.0 * median(converged)?;
    errors.iter().position(|&e| e < limit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use gwrnet::hierarchy::Forecast;

    fn record(pred: &[[f64; 2]], truth: &[[f64; 2]], quant: &[[f64; 2]]) -> EvalRecord<f64> {
        EvalRecord {
            forecast: Forecast {
                t: 0,
                current: vec![0.0, 0.0],
                predictions: pred.iter().map(|p| p.to_vec()).collect(),
            },
            truth: truth.iter().map(|p| p.to_vec()).collect(),
            quantized: quant.iter().map(|p| p.to_vec()).collect(),
        }
    }

    #[test]
    fn pooled_error_by_hand() {
        let r = [
            record(&[[1.0, 0.0], [0.0, 0.0]], &[[0.0, 0.0], [0.0, 2.0]], &[[1.0, 0.0], [0.0, 1.0]]),
            record(&[[0.5, 0.5]], &[[0.5, 0.5]], &[[0.5, 0.5]]),
        ];
        let e = pooled_error(&r);
        assert_eq!(e.predictions, 3);
        assert!((e.mse - 5.0 / 6.0).abs() < 1e-15);
        assert!((e.mae - 3.0 / 6.0).abs() < 1e-15);
        assert!((e.pe - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(pooled_error(&[]), PatternError::default());
    }

    #[test]
    fn cumulative_weights_patterns_equally() {
        let a = PatternError { mse: 1.0, pe: 0.5, mae: 0.0, predictions: 10 };
        let b = PatternError { mse: 3.0, pe: 0.5, mae: 0.0, predictions: 1000 };
        assert_eq!(cumulative(&[a, b]), (2.0, 0.5));
        assert_eq!(cumulative(&[a]), (1.0, 0.5));
    }

    #[test]
    fn adaptation_counts_frames() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0]), Some(2.5));
        let errors = [9.0, 8.0, 5.0, 1.0, 3.0];
        assert_eq!(frames_to_adapt(&errors, &[1.0, 1.0, 1.0]), Some(3));
        assert_eq!(frames_to_adapt(&errors, &[0.1]), None);
        assert_eq!(frames_to_adapt(&errors, &[]), None);
    }
}
