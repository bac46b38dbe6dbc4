//! Output directory bookkeeping and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use porestab::mesh::MeshSummary;

use crate::config::RunConfig;
use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.toml";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Checksum of the mesh dimensions, stable across runs and platforms.
pub fn mesh_checksum(summary: &MeshSummary) -> String {
    let canonical = format!(
        "R={:e};h={:e};n_r={};n_theta={};n_z={}",
        summary.radius, summary.height, summary.n_r, summary.n_theta, summary.n_z
    );
    sha256_hex(canonical.as_bytes())
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// `complete`, or `incomplete` when the run stopped early.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub mesh_checksums: BTreeMap<String, String>,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
    pub verdicts: BTreeMap<String, String>,
    pub files: Vec<FileEntry>,
    pub config: RunConfig,
}

/// Writes outputs into one directory and records what was written.
pub struct OutputDir {
    dir: PathBuf,
    started: Instant,
    pub manifest: RunManifest,
}

impl OutputDir {
    pub fn create(dir: &Path, command: &str, config: &RunConfig) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            started: Instant::now(),
            manifest: RunManifest {
                tool: env!("CARGO_PKG_NAME").into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command: command.into(),
                status: "incomplete".into(),
                error: None,
                mesh_checksums: BTreeMap::new(),
                timings: BTreeMap::new(),
                verdicts: BTreeMap::new(),
                files: Vec::new(),
                config: config.clone(),
            },
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    /// Write `name` from an in-memory buffer and record its hash.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.manifest.files.retain(|f| f.path != name);
        self.manifest.files.push(FileEntry {
            path: name.into(),
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    /// Render with `f` into a buffer, then [`OutputDir::write`] it.
    pub fn write_with(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    ) -> Result<(), CliError> {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| CliError::Io(format!("{name}: {e}")))?;
        self.write(name, &buf)
    }

    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let t0 = Instant::now();
        let out = f();
        self.manifest.timings.insert(phase.into(), t0.elapsed().as_secs_f64());
        out
    }

    /// Write the manifest through a temporary file and a rename, so readers never see a partial one.
    pub fn finish(mut self, outcome: &Result<(), CliError>) -> Result<(), CliError> {
        self.manifest.timings.insert("total".into(), self.started.elapsed().as_secs_f64());
        match outcome {
            Ok(()) => self.manifest.status = "complete".into(),
            Err(e) => {
                self.manifest.status = "incomplete".into();
                self.manifest.error = Some(e.to_string());
            }
        }
        let text = toml::to_string(&self.manifest)
            .map_err(|e| CliError::Io(format!("manifest serialization failed: {e}")))?;
        let tmp = self.dir.join(format!(".{MANIFEST_FILE}.tmp"));
        let dest = self.dir.join(MANIFEST_FILE);
        let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dest.display()));
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(text.as_bytes()).map_err(io)?;
        f.sync_all().map_err(io)?;
        fs::rename(&tmp, &dest).map_err(io)
    }
}
