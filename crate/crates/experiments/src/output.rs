//! Run directories: CSV tables plus `manifest.json`.
//!
//! The manifest records the command, the seed, the SHA-256 of the resolved
//! configuration, tool versions and the SHA-256 of every file written. It
//! holds no timestamps, so two runs with the same configuration produce
//! identical directories.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RUN_FORMAT: &str = "gwrnet-run";
pub const RUN_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputFile {
    /// Path relative to the run directory, `/` separated.
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub format: &'static str,
    pub format_version: u32,
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    pub tool_version: &'static str,
    pub library_version: &'static str,
    pub outputs: Vec<OutputFile>,
}

pub struct RunWriter {
    dir: PathBuf,
    outputs: Vec<OutputFile>,
}

impl RunWriter {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(RunWriter {
            dir: dir.to_path_buf(),
            outputs: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        self.outputs.push(OutputFile {
            file: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len(),
        });
        Ok(())
    }

    /// One CSV row per element, header from the field names.
    pub fn write_rows<S: Serialize>(&mut self, name: &str, rows: &[S]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        self.write_bytes(name, &bytes)
    }

    /// Registers a file some other writer already put in the run directory.
    pub fn record_existing(&mut self, name: &str) -> Result<()> {
        let bytes = fs::read(self.dir.join(name))?;
        self.outputs.push(OutputFile {
            file: name.to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
            bytes: bytes.len(),
        });
        Ok(())
    }

    pub fn finish(self, command: &str, seed: u64, config_hash: String) -> Result<RunManifest> {
        let manifest = RunManifest {
            format: RUN_FORMAT,
            format_version: RUN_FORMAT_VERSION,
            command: command.to_string(),
            seed,
            config_hash,
            tool_version: env!("CARGO_PKG_VERSION"),
            library_version: gwrnet::VERSION,
            outputs: self.outputs,
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
        fs::write(self.dir.join(MANIFEST_FILE), text + "\n")?;
        Ok(manifest)
    }
}
