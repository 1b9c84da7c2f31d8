use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::sequence::MotionSequence;
use crate::error::{GwrError, Result};
use crate::scalar::Scalar;

/// One second at 10 fps.
pub const DEFAULT_CHUNK_FRAMES: usize = 10;
pub const MAX_LOSS_FRACTION: f64 = 0.95;

#[derive(Debug, Clone, PartialEq)]
pub struct Dropout<T> {
    pub corrupted: MotionSequence<T>,
    pub achieved_fraction: f64,
    /// Start offsets (into the input sequence) of the removed chunks, ascending.
    pub removed_starts: Vec<usize>,
}

/// Number of whole chunks needed to remove at least `target` of `n` frames.
pub fn chunks_needed(n: usize, target: f64, chunk: usize) -> usize {
    (target * n as f64 / chunk as f64 - 1e-9).ceil().max(0.0) as usize
}

/// Removes randomly placed, non-overlapping chunks of `chunk_frames`
/// consecutive frames until at least `target_fraction` of the sequence is
/// gone. Surviving frames keep their values, order and original indices; the
/// first survivor after every removed chunk is flagged as following a gap.
///
/// Placements are uniform over all non-overlapping layouts.
pub fn corrupt_dropout<T: Scalar>(
    seq: &MotionSequence<T>,
    target_fraction: f64,
    chunk_frames: usize,
    seed: u64,
) -> Result<Dropout<T>> {
    if !(0.0..=MAX_LOSS_FRACTION).contains(&target_fraction) {
        return Err(GwrError::InfeasibleDropout(format!(
            "fraction {target_fraction} outside [0, {MAX_LOSS_FRACTION}]"
        )));
    }
    let n = seq.len();
    if chunk_frames == 0 || chunk_frames > n {
        return Err(GwrError::InfeasibleDropout(format!(
            "chunk of {chunk_frames} frames for a sequence of {n}"
        )));
    }
    let k = chunks_needed(n, target_fraction, chunk_frames);
    if k * chunk_frames >= n && k > 0 {
        return Err(GwrError::InfeasibleDropout(format!(
            "{k} chunks of {chunk_frames} frames would remove all {n} frames"
        )));
    }
    // Stars and bars: k chunks among m kept frames give C(m + k, k) layouts.
    let m = n - k * chunk_frames;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slots = sample(&mut rng, m + k, k).into_vec();
    slots.sort_unstable();
    let starts: Vec<usize> = slots
        .iter()
        .enumerate()
        .map(|(i, y)| y + i * (chunk_frames - 1))
        .collect();

    let mut removed = vec![false; n];
    for &s in &starts {
        removed[s..s + chunk_frames].iter_mut().for_each(|r| *r = true);
    }
    let mut frames = Vec::with_capacity(m);
    let mut indices = Vec::with_capacity(m);
    let mut gaps = Vec::with_capacity(m);
    let mut pending_gap = false;
    for i in 0..n {
        if removed[i] {
            pending_gap = true;
            continue;
        }
        frames.push(seq.frames()[i]);
        indices.push(seq.indices()[i]);
        // Nothing precedes the first survivor, so a leading chunk is not a gap.
        let first = gaps.is_empty();
        gaps.push(!first && (pending_gap || seq.gap_before()[i]));
        pending_gap = false;
    }
    let corrupted = MotionSequence::with_gaps(
        frames,
        indices,
        gaps,
        seq.fps,
        seq.pattern_label.clone(),
        seq.subject_id.clone(),
    )?;
    Ok(Dropout {
        corrupted,
        achieved_fraction: (k * chunk_frames) as f64 / n as f64,
        removed_starts: starts,
    })
}
