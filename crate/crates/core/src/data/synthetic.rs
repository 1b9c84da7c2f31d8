//! Smooth periodic arm trajectories standing in for recorded demonstrations.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::sequence::{Frame, MotionSequence, DEFAULT_FPS};
use crate::error::{GwrError, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatternKind {
    RaiseLateral,
    RaiseFront,
    Wave,
    CircleCw,
    CircleCcw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    pub kind: PatternKind,
    pub side: Side,
}

impl PatternKind {
    const ALL: [PatternKind; 5] = [
        PatternKind::RaiseLateral,
        PatternKind::RaiseFront,
        PatternKind::Wave,
        PatternKind::CircleCw,
        PatternKind::CircleCcw,
    ];

    fn name(self) -> &'static str {
        match self {
            PatternKind::RaiseLateral => "raise-lateral",
            PatternKind::RaiseFront => "raise-front",
            PatternKind::Wave => "wave",
            PatternKind::CircleCw => "circle-cw",
            PatternKind::CircleCcw => "circle-ccw",
        }
    }

    /// Nominal period in seconds.
    fn period_s(self) -> f64 {
        match self {
            PatternKind::Wave => 1.6,
            PatternKind::CircleCw | PatternKind::CircleCcw => 2.4,
            _ => 3.0,
        }
    }
}

impl Side {
    fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Both => "both",
        }
    }
}

impl Pattern {
    pub const fn new(kind: PatternKind, side: Side) -> Self {
        Pattern { kind, side }
    }

    /// Label such as `raise-front-both`.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.kind.name(), self.side.name())
    }
}

impl FromStr for Pattern {
    type Err = GwrError;

    fn from_str(s: &str) -> Result<Self> {
        for kind in PatternKind::ALL {
            for side in [Side::Left, Side::Right, Side::Both] {
                let p = Pattern::new(kind, side);
                if p.label() == s {
                    return Ok(p);
                }
            }
        }
        Err(GwrError::InvalidParams(format!("unknown pattern `{s}`")))
    }
}

/// The ten-pattern suite: lateral and frontal raises of each arm and both,
/// single-arm waves, and two-arm rotations in each direction.
pub const DEFAULT_SUITE: [Pattern; 10] = [
    Pattern::new(PatternKind::RaiseLateral, Side::Left),
    Pattern::new(PatternKind::RaiseLateral, Side::Right),
    Pattern::new(PatternKind::RaiseLateral, Side::Both),
    Pattern::new(PatternKind::RaiseFront, Side::Left),
    Pattern::new(PatternKind::RaiseFront, Side::Right),
    Pattern::new(PatternKind::RaiseFront, Side::Both),
    Pattern::new(PatternKind::Wave, Side::Left),
    Pattern::new(PatternKind::Wave, Side::Right),
    Pattern::new(PatternKind::CircleCw, Side::Both),
    Pattern::new(PatternKind::CircleCcw, Side::Both),
];

/// Arm angles `[shoulder pitch, shoulder yaw, elbow yaw, elbow roll]` at rest.
pub const REST_POSE: [f64; 4] = [1.4, 0.1, 0.0, 0.2];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub pattern: Pattern,
    /// Relative spread of amplitude, period and phase between subjects, in [0, 1].
    pub subject_jitter: f64,
    /// Standard deviation of the additive noise, radians.
    pub noise_std: f64,
    pub duration_s: f64,
    pub fps: f64,
    /// Selects the subject's style; the same subject always moves the same way.
    pub subject: u32,
    /// Seeds the noise and the start phase of a repetition.
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(pattern: Pattern, seed: u64) -> Self {
        SyntheticSpec {
            pattern,
            subject_jitter: 0.0,
            noise_std: 0.0,
            duration_s: 10.0,
            fps: DEFAULT_FPS,
            subject: 0,
            seed,
        }
    }

    pub fn frame_count(&self) -> usize {
        (self.duration_s * self.fps).round() as usize
    }
}

struct Style {
    amplitude: f64,
    period_s: f64,
    phase: f64,
}

fn subject_style(spec: &SyntheticSpec) -> Style {
    let j = spec.subject_jitter;
    let mut rng = ChaCha8Rng::seed_from_u64(u64::from(spec.subject));
    let mut unit = || rng.random_range(-1.0..=1.0);
    Style {
        amplitude: 1.0 + 0.25 * j * unit(),
        period_s: spec.pattern.kind.period_s() * (1.0 + 0.3 * j * unit()),
        phase: PI * j * unit(),
    }
}

fn arm_pose(kind: PatternKind, phi: f64, amplitude: f64, mirror: bool) -> [f64; 4] {
    let raise = 0.5 * (1.0 - phi.cos());
    match kind {
        PatternKind::RaiseLateral => [
            REST_POSE[0] - 0.2 * amplitude * raise,
            REST_POSE[1] + 1.3 * amplitude * raise,
            REST_POSE[2],
            REST_POSE[3] + 0.1 * amplitude * raise,
        ],
        PatternKind::RaiseFront => [
            REST_POSE[0] - 2.2 * amplitude * raise,
            REST_POSE[1],
            REST_POSE[2] + 0.3 * amplitude * raise,
            REST_POSE[3] + 0.3 * amplitude * raise,
        ],
        PatternKind::Wave => [-0.6, 0.4, 1.2, 0.9 + 0.5 * amplitude * phi.sin()],
        PatternKind::CircleCw | PatternKind::CircleCcw => {
            let dir = if (kind == PatternKind::CircleCw) != mirror { 1.0 } else { -1.0 };
            [
                0.6 + 0.5 * amplitude * phi.cos(),
                0.6 + 0.5 * amplitude * (dir * phi).sin(),
                0.0,
                0.3,
            ]
        }
    }
}

/// Generates one demonstration. Deterministic in `spec`.
pub fn generate_synthetic<T: Scalar>(spec: &SyntheticSpec) -> Result<MotionSequence<T>> {
    if !(spec.duration_s >= 1.0) || !spec.duration_s.is_finite() {
        return Err(GwrError::InvalidParams(format!(
            "duration must be at least 1 s, got {}",
            spec.duration_s
        )));
    }
    if !(spec.noise_std >= 0.0) || !spec.noise_std.is_finite() {
        return Err(GwrError::InvalidParams(format!("noise_std must be >= 0, got {}", spec.noise_std)));
    }
    if !(0.0..=1.0).contains(&spec.subject_jitter) {
        return Err(GwrError::InvalidParams(format!(
            "subject_jitter must lie in [0, 1], got {}",
            spec.subject_jitter
        )));
    }
    if !(spec.fps > 0.0) || !spec.fps.is_finite() {
        return Err(GwrError::InvalidParams(format!("fps must be positive, got {}", spec.fps)));
    }
    let style = subject_style(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let start = if spec.subject_jitter > 0.0 {
        rng.random_range(0.0..0.1 * TAU)
    } else {
        0.0
    };
    let noise = Normal::new(0.0, spec.noise_std).map_err(|e| GwrError::InvalidParams(e.to_string()))?;
    let n = spec.frame_count();
    let mut frames = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / spec.fps;
        let phi = TAU * t / style.period_s + style.phase + start;
        let (left, right) = match spec.pattern.side {
            Side::Left => (arm_pose(spec.pattern.kind, phi, style.amplitude, false), REST_POSE),
            Side::Right => (REST_POSE, arm_pose(spec.pattern.kind, phi, style.amplitude, true)),
            Side::Both => (
                arm_pose(spec.pattern.kind, phi, style.amplitude, false),
                arm_pose(spec.pattern.kind, phi, style.amplitude, true),
            ),
        };
        let mut frame: Frame<T> = [T::zero(); 8];
        for (k, v) in left.iter().chain(right.iter()).enumerate() {
            let e = if spec.noise_std > 0.0 { noise.sample(&mut rng) } else { 0.0 };
            frame[k] = T::lit(v + e);
        }
        frames.push(frame);
    }
    MotionSequence::new(
        frames,
        spec.fps,
        spec.pattern.label(),
        format!("s{}", spec.subject + 1),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::sequence::JointLimits;

    fn spec(pattern: Pattern) -> SyntheticSpec {
        SyntheticSpec::new(pattern, 7)
    }

    #[test]
    fn ten_seconds_is_a_hundred_frames() {
        let seq: MotionSequence<f64> = generate_synthetic(&spec(DEFAULT_SUITE[0])).unwrap();
        assert_eq!(seq.len(), 100);
        assert_eq!(seq.pattern_label, "raise-lateral-left");
    }

    #[test]
    fn deterministic() {
        let mut s = spec(DEFAULT_SUITE[4]);
        s.noise_std = 0.02;
        s.subject_jitter = 0.5;
        let a: MotionSequence<f64> = generate_synthetic(&s).unwrap();
        let b: MotionSequence<f64> = generate_synthetic(&s).unwrap();
        assert_eq!(a, b);
        s.seed += 1;
        let c: MotionSequence<f64> = generate_synthetic(&s).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn noiseless_suite_stays_within_limits() {
        for p in DEFAULT_SUITE {
            for subject in 0..3 {
                let mut s = spec(p);
                s.subject = subject;
                s.subject_jitter = 1.0;
                let seq: MotionSequence<f64> = generate_synthetic(&s).unwrap();
                assert!(seq.within_limits(&JointLimits::default()), "{p}");
            }
        }
    }

    fn power_at(xs: &[f64], cycles: f64) -> f64 {
        let n = xs.len() as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (i, x) in xs.iter().enumerate() {
            let w = TAU * cycles * i as f64 / n;
            re += x * w.cos();
            im -= x * w.sin();
        }
        (re * re + im * im) / (n * n)
    }

    #[test]
    fn wave_moves_the_elbow_not_the_shoulder() {
        // 16 s of a 1.6 s period: exactly 10 cycles in the window.
        let mut s = spec(Pattern::new(PatternKind::Wave, Side::Left));
        s.duration_s = 16.0;
        let seq: MotionSequence<f64> = generate_synthetic(&s).unwrap();
        let pitch: Vec<f64> = seq.frames().iter().map(|f| f[0]).collect();
        let roll: Vec<f64> = seq.frames().iter().map(|f| f[3]).collect();
        assert!(power_at(&roll, 10.0) > 0.05);
        assert!(power_at(&pitch, 10.0) < 1e-20);
        for c in 1..80 {
            assert!(power_at(&pitch, c as f64) < 1e-20);
        }
    }

    #[test]
    fn inactive_arm_rests() {
        let seq: MotionSequence<f64> =
            generate_synthetic(&spec(Pattern::new(PatternKind::RaiseFront, Side::Right))).unwrap();
        for f in seq.frames() {
            assert_eq!(&f[..4], &REST_POSE);
        }
        assert!(seq.frames().iter().any(|f| f[4] < 0.0));
    }

    #[test]
    fn circles_turn_opposite_ways() {
        let cw: MotionSequence<f64> =
            generate_synthetic(&spec(Pattern::new(PatternKind::CircleCw, Side::Left))).unwrap();
        let ccw: MotionSequence<f64> =
            generate_synthetic(&spec(Pattern::new(PatternKind::CircleCcw, Side::Left))).unwrap();
        let f = 3;
        assert_eq!(cw.frames()[f][0], ccw.frames()[f][0]);
        assert!((cw.frames()[f][1] - 0.6) * (ccw.frames()[f][1] - 0.6) < 0.0);
    }

    #[test]
    fn labels_round_trip() {
        for p in DEFAULT_SUITE {
            assert_eq!(p.label().parse::<Pattern>().unwrap(), p);
        }
        assert!("jump".parse::<Pattern>().is_err());
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = spec(DEFAULT_SUITE[0]);
        s.duration_s = 0.5;
        assert!(generate_synthetic::<f64>(&s).is_err());
        let mut s = spec(DEFAULT_SUITE[0]);
        s.noise_std = -1.0;
        assert!(generate_synthetic::<f64>(&s).is_err());
    }
}
