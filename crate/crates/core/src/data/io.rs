//! On-disk layout of demonstrations.
//!
//! A sequence is a CSV file with the header
//! `t_index,l_shoulder_pitch,…,r_elbow_roll,gap` (one row per frame, angles in
//! radians written with an exact round-trip decimal encoding, `gap` is `0` or
//! `1`) plus a sidecar `<file>.meta` TOML record:
//!
//! ```toml
//! format = "gwrnet-sequence"
//! version = 1
//! fps = 10.0
//! pattern_label = "wave-left"
//! subject_id = "s1"
//! ```
//!
//! A dataset directory holds one such pair per demonstration and a
//! `manifest.csv` with columns `file,pattern,subject,repetition`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::sequence::{Frame, MotionSequence, FRAME_DIM, JOINT_NAMES};
use crate::error::{GwrError, Result};
use crate::scalar::Scalar;
use crate::snapshot::{format_real, parse_real};

pub const SEQUENCE_FORMAT: &str = "gwrnet-sequence";
pub const SEQUENCE_FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceMeta {
    format: String,
    version: u32,
    fps: f64,
    pattern_label: String,
    subject_id: String,
}

fn csv_error(e: csv::Error) -> GwrError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => GwrError::Io(io.to_string()),
        other => GwrError::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

pub fn meta_path(csv_path: &Path) -> PathBuf {
    let mut s = csv_path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

pub fn write_sequence_csv<T: Scalar, W: std::io::Write>(seq: &MotionSequence<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t_index"];
    header.extend(JOINT_NAMES);
    header.push("gap");
    w.write_record(&header).map_err(csv_error)?;
    for ((frame, idx), gap) in seq.frames().iter().zip(seq.indices()).zip(seq.gap_before()) {
        let mut row = Vec::with_capacity(FRAME_DIM + 2);
        row.push(idx.to_string());
        row.extend(frame.iter().map(|&v| format_real(v)));
        row.push(if *gap { "1" } else { "0" }.to_string());
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Parsed CSV body: frames, original indices and gap flags.
pub type SequenceRows<T> = (Vec<Frame<T>>, Vec<u64>, Vec<bool>);

pub fn read_sequence_csv<T: Scalar, R: std::io::Read>(input: R) -> Result<SequenceRows<T>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(csv_error)?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| GwrError::MissingColumn(name.to_string()))
    };
    let t_col = column("t_index")?;
    let angle_cols = JOINT_NAMES.map(column);
    let mut angles = [0usize; FRAME_DIM];
    for (slot, c) in angles.iter_mut().zip(angle_cols) {
        *slot = c?;
    }
    let gap_col = column("gap")?;

    let (mut frames, mut indices, mut gaps) = (Vec::new(), Vec::new(), Vec::new());
    for record in r.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |c: usize| record.get(c).unwrap_or("").trim();
        let bad = |message: String| GwrError::Parse { line, message };
        let idx = field(t_col)
            .parse::<u64>()
            .map_err(|e| bad(format!("t_index: {e}")))?;
        let mut frame = [T::zero(); FRAME_DIM];
        for (k, &c) in angles.iter().enumerate() {
            let token = field(c);
            frame[k] = parse_real(token)
                .ok_or_else(|| bad(format!("{}: not a finite real `{token}`", JOINT_NAMES[k])))?;
        }
        let gap = match field(gap_col) {
            "0" => false,
            "1" => true,
            other => return Err(bad(format!("gap: expected 0 or 1, got `{other}`"))),
        };
        frames.push(frame);
        indices.push(idx);
        gaps.push(gap);
    }
    Ok((frames, indices, gaps))
}

/// Writes `path` and its `.meta` sidecar.
pub fn save_sequence<T: Scalar>(seq: &MotionSequence<T>, path: &Path) -> Result<()> {
    write_sequence_csv(seq, fs::File::create(path)?)?;
    let meta = SequenceMeta {
        format: SEQUENCE_FORMAT.into(),
        version: SEQUENCE_FORMAT_VERSION,
        fps: seq.fps,
        pattern_label: seq.pattern_label.clone(),
        subject_id: seq.subject_id.clone(),
    };
    let text = toml::to_string(&meta).map_err(|e| GwrError::Io(e.to_string()))?;
    fs::write(meta_path(path), text)?;
    Ok(())
}

pub fn load_sequence<T: Scalar>(path: &Path) -> Result<MotionSequence<T>> {
    let text = fs::read_to_string(meta_path(path))?;
    let meta: SequenceMeta = toml::from_str(&text).map_err(|e| GwrError::Parse {
        line: 0,
        message: format!("{}: {e}", meta_path(path).display()),
    })?;
    if meta.format != SEQUENCE_FORMAT || meta.version != SEQUENCE_FORMAT_VERSION {
        return Err(GwrError::Parse {
            line: 0,
            message: format!("unsupported sequence format {} v{}", meta.format, meta.version),
        });
    }
    let (frames, indices, gaps) = read_sequence_csv(fs::File::open(path)?)?;
    MotionSequence::with_gaps(frames, indices, gaps, meta.fps, meta.pattern_label, meta.subject_id)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Path relative to the dataset directory.
    pub file: String,
    pub pattern: String,
    pub subject: String,
    pub repetition: u32,
}

pub fn write_manifest(dir: &Path, entries: &[ManifestEntry]) -> Result<()> {
    let mut w = csv::Writer::from_path(dir.join(MANIFEST_FILE)).map_err(csv_error)?;
    for e in entries {
        w.serialize(e).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<Vec<ManifestEntry>> {
    let mut r = csv::Reader::from_path(dir.join(MANIFEST_FILE)).map_err(csv_error)?;
    r.deserialize().map(|e| e.map_err(csv_error)).collect()
}

/// Saves every sequence as `<pattern>_<subject>_r<rep>.csv` and writes the manifest.
pub fn save_dataset<T: Scalar>(dir: &Path, items: &[(MotionSequence<T>, u32)]) -> Result<Vec<ManifestEntry>> {
    fs::create_dir_all(dir)?;
    let mut entries = Vec::with_capacity(items.len());
    for (seq, rep) in items {
        let file = format!("{}_{}_r{:02}.csv", seq.pattern_label, seq.subject_id, rep);
        save_sequence(seq, &dir.join(&file))?;
        entries.push(ManifestEntry {
            file,
            pattern: seq.pattern_label.clone(),
            subject: seq.subject_id.clone(),
            repetition: *rep,
        });
    }
    write_manifest(dir, &entries)?;
    Ok(entries)
}

/// Loads a dataset in manifest order.
pub fn load_dataset<T: Scalar>(dir: &Path) -> Result<Vec<(ManifestEntry, MotionSequence<T>)>> {
    read_manifest(dir)?
        .into_iter()
        .map(|e| {
            let seq = load_sequence(&dir.join(&e.file))?;
            Ok((e, seq))
        })
        .collect()
}
