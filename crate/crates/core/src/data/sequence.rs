use crate::error::{GwrError, Result};
use crate::scalar::Scalar;

/// Joint angles per frame: shoulder pitch and yaw, elbow yaw and roll, for each arm.
pub const FRAME_DIM: usize = 8;

/// Column names of the eight joint angles, left arm first.
pub const JOINT_NAMES: [&str; FRAME_DIM] = [
    "l_shoulder_pitch",
    "l_shoulder_yaw",
    "l_elbow_yaw",
    "l_elbow_roll",
    "r_shoulder_pitch",
    "r_shoulder_yaw",
    "r_elbow_yaw",
    "r_elbow_roll",
];

/// Nominal frame rate after median downsampling.
pub const DEFAULT_FPS: f64 = 10.0;

/// One body posture, in radians.
pub type Frame<T> = [T; FRAME_DIM];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointLimits {
    pub lower: f64,
    pub upper: f64,
}

impl Default for JointLimits {
    fn default() -> Self {
        JointLimits {
            lower: -std::f64::consts::PI,
            upper: std::f64::consts::PI,
        }
    }
}

impl JointLimits {
    pub fn contains<T: Scalar>(&self, frame: &Frame<T>) -> bool {
        frame.iter().all(|a| {
            let a = a.to_f64_lossless();
            a >= self.lower && a <= self.upper
        })
    }
}

/// A demonstration: frames at a uniform rate, possibly with gaps where
/// data was lost. Gaps are hard boundaries: nothing is interpolated across them.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionSequence<T> {
    frames: Vec<Frame<T>>,
    /// Original time index of every frame.
    indices: Vec<u64>,
    /// `true` when data is missing right before this frame.
    gap_before: Vec<bool>,
    pub fps: f64,
    pub pattern_label: String,
    pub subject_id: String,
}

impl<T: Scalar> MotionSequence<T> {
    pub fn new(
        frames: Vec<Frame<T>>,
        fps: f64,
        pattern_label: impl Into<String>,
        subject_id: impl Into<String>,
    ) -> Result<Self> {
        let n = frames.len();
        Self::with_gaps(
            frames,
            (0..n as u64).collect(),
            vec![false; n],
            fps,
            pattern_label,
            subject_id,
        )
    }

    pub fn with_gaps(
        frames: Vec<Frame<T>>,
        indices: Vec<u64>,
        gap_before: Vec<bool>,
        fps: f64,
        pattern_label: impl Into<String>,
        subject_id: impl Into<String>,
    ) -> Result<Self> {
        if frames.is_empty() {
            return Err(GwrError::Empty("motion sequence"));
        }
        if indices.len() != frames.len() || gap_before.len() != frames.len() {
            return Err(GwrError::DimensionMismatch {
                expected: frames.len(),
                actual: indices.len().min(gap_before.len()),
            });
        }
        if !(fps.is_finite() && fps > 0.0) {
            return Err(GwrError::InvalidParams(format!("fps must be positive, got {fps}")));
        }
        if frames.iter().any(|f| f.iter().any(|a| !a.is_finite())) {
            return Err(GwrError::NonFinite);
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(GwrError::InvalidParams("frame indices must increase".into()));
        }
        Ok(MotionSequence {
            frames,
            indices,
            gap_before,
            fps,
            pattern_label: pattern_label.into(),
            subject_id: subject_id.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> &[Frame<T>] {
        &self.frames
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    pub fn gap_before(&self) -> &[bool] {
        &self.gap_before
    }

    pub fn gap_count(&self) -> usize {
        self.gap_before.iter().filter(|&&g| g).count()
    }

    /// Duration of one frame in milliseconds.
    pub fn frame_period_ms(&self) -> f64 {
        1000.0 / self.fps
    }

    /// Contiguous runs of frames between gaps.
    pub fn segments(&self) -> Vec<&[Frame<T>]> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..self.frames.len() {
            if self.gap_before[i] {
                out.push(&self.frames[start..i]);
                start = i;
            }
        }
        out.push(&self.frames[start..]);
        out
    }

    pub fn within_limits(&self, limits: &JointLimits) -> bool {
        self.frames.iter().all(|f| limits.contains(f))
    }
}
