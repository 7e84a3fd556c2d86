//! CSV emission and the run manifest.
//!
//! Numbers are written with 17 significant digits in scientific notation so
//! identical runs give byte-identical files. Every file is written to a
//! temporary name and renamed into place.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

/// Fixed numeric format: 17 significant digits, scientific notation.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `bytes` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming {}", tmp.display()))?;
    Ok(())
}

/// Renders a CSV table with a header row.
pub fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))
}

/// Hex SHA-256 of a file.
pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

/// Checksummed output entry.
#[derive(Clone, Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Run manifest, written when a run starts and rewritten when it ends.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub status: String,
    pub started_unix: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
    pub parallel: bool,
    pub config: RunConfig,
    /// Run-specific results such as slopes or conservation percentages.
    pub summary: BTreeMap<String, String>,
    pub files: Vec<FileEntry>,
}

/// Output directory plus the manifest being built.
pub struct RunOutput {
    dir: PathBuf,
    started: Instant,
    files: Vec<PathBuf>,
    pub manifest: RunManifest,
}

impl RunOutput {
    /// Creates the directory and writes the initial manifest.
    pub fn start(dir: &Path, command: &str, config: RunConfig) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let started_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let out = Self {
            dir: dir.to_path_buf(),
            started: Instant::now(),
            files: Vec::new(),
            manifest: RunManifest {
                tool: env!("CARGO_PKG_NAME").to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                command: command.to_string(),
                status: "running".to_string(),
                started_unix,
                wall_clock_seconds: None,
                parallel: crb_core::par::parallel_enabled(),
                config,
                summary: BTreeMap::new(),
                files: Vec::new(),
            },
        };
        out.write_manifest()?;
        Ok(out)
    }

    /// Writes a CSV file into the output directory and registers it.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let path = self.dir.join(name);
        write_atomic(&path, &csv_bytes(header, rows)?)?;
        self.files.push(path);
        Ok(())
    }

    /// Records a summary entry.
    pub fn note(&mut self, key: &str, value: impl Into<String>) {
        self.manifest.summary.insert(key.to_string(), value.into());
    }

    fn write_manifest(&self) -> Result<()> {
        let text = toml::to_string_pretty(&self.manifest).context("serialising manifest")?;
        write_atomic(&self.dir.join("manifest.toml"), text.as_bytes())
    }

    /// Checksums every emitted file and rewrites the manifest with `status`.
    pub fn finish(mut self, status: &str) -> Result<PathBuf> {
        let mut entries = Vec::with_capacity(self.files.len());
        for p in &self.files {
            entries.push(FileEntry {
                path: p
                    .file_name()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default(),
                sha256: sha256_file(p)?,
                bytes: fs::metadata(p)?.len(),
            });
        }
        self.manifest.files = entries;
        self.manifest.status = status.to_string();
        self.manifest.wall_clock_seconds = Some(self.started.elapsed().as_secs_f64());
        self.write_manifest()?;
        Ok(self.dir.join("manifest.toml"))
    }
}
