use super::sequence::{Frame, MotionSequence};
use crate::error::{GwrError, Result};
use crate::scalar::Scalar;

/// Downsampling factor between the camera (30 fps) and the learning rate (10 fps).
pub const DOWNSAMPLE_FACTOR: usize = 3;

#[inline]
fn median3<T: Scalar>(a: T, b: T, c: T) -> T {
    a.min(b).max(a.max(b).min(c))
}

/// Component-wise median of every non-overlapping triple of frames.
/// A trailing remainder of fewer than three frames is dropped.
pub fn median_downsample<T: Scalar, const N: usize>(raw: &[[T; N]]) -> Result<Vec<[T; N]>> {
    if raw.len() < DOWNSAMPLE_FACTOR {
        return Err(GwrError::SequenceTooShort {
            needed: DOWNSAMPLE_FACTOR,
            actual: raw.len(),
        });
    }
    if raw.iter().any(|f| f.iter().any(|v| !v.is_finite())) {
        return Err(GwrError::NonFinite);
    }
    Ok(raw
        .chunks_exact(DOWNSAMPLE_FACTOR)
        .map(|t| std::array::from_fn(|k| median3(t[0][k], t[1][k], t[2][k])))
        .collect())
}

/// Downsamples raw 30 fps angle frames into a 10 fps sequence.
pub fn downsample_sequence<T: Scalar>(
    raw: &[Frame<T>],
    raw_fps: f64,
    pattern_label: &str,
    subject_id: &str,
) -> Result<MotionSequence<T>> {
    let frames = median_downsample(raw)?;
    MotionSequence::new(
        frames,
        raw_fps / DOWNSAMPLE_FACTOR as f64,
        pattern_label,
        subject_id,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn median_of_three() {
        let out = median_downsample(&[[1.0], [9.0], [2.0]]).unwrap();
        assert_eq!(out, vec![[2.0]]);
    }

    #[test]
    fn constant_input_shrinks_by_three() {
        let raw = vec![[0.25, -1.0]; 31];
        let out = median_downsample(&raw).unwrap();
        assert_eq!(out, vec![[0.25, -1.0]; 10]);
    }

    #[test]
    fn too_short() {
        assert!(median_downsample(&[[1.0], [2.0]]).is_err());
    }

    #[test]
    fn sequence_rate() {
        let raw = vec![[0.0; 8]; 90];
        let seq = downsample_sequence(&raw, 30.0, "wave", "s1").unwrap();
        assert_eq!(seq.len(), 30);
        assert_eq!(seq.fps, 10.0);
    }

    #[test]
    fn single_spike_per_triple_is_removed() {
        // Every position and sign of a spike inside a triple of a smooth ramp.
        for pos in 0..3 {
            for spike in [-50.0, 50.0] {
                let mut raw: Vec<[f64; 1]> = (0..3).map(|i| [i as f64 * 0.1]).collect();
                raw[pos][0] += spike;
                let out = median_downsample(&raw).unwrap()[0][0];
                assert!(out.abs() <= 0.2 + 1e-12, "pos {pos} spike {spike} -> {out}");
            }
        }
    }

    proptest! {
        #[test]
        fn commutes_with_monotone_maps(a in -10.0f64..10.0, b in -10.0f64..10.0, c in -10.0f64..10.0) {
            let f = |x: f64| x.powi(3) + 2.0 * x;
            let direct = median_downsample(&[[f(a)], [f(b)], [f(c)]]).unwrap()[0][0];
            let mapped = f(median_downsample(&[[a], [b], [c]]).unwrap()[0][0]);
            prop_assert_eq!(direct, mapped);
        }
    }
}
