use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize)]
struct FileEntry {
    path: String,
    bytes: u64,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Timing {
    stage: String,
    seconds: f64,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    core_version: &'a str,
    subcommand: &'a str,
    config_sha256: &'a str,
    seed: u64,
    exit_code: i32,
    files: Vec<FileEntry>,
    timings: Vec<Timing>,
}

/// Output directory that remembers what was written and how long each stage took.
pub struct OutDir {
    pub root: PathBuf,
    files: Vec<PathBuf>,
    timings: Vec<Timing>,
    stage_start: Instant,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|e| CliError::Io(format!("{}: {e}", root.display())))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
            timings: Vec::new(),
            stage_start: Instant::now(),
        })
    }

    /// Path for a new artifact; parent directories are created.
    pub fn path(&mut self, rel: &str) -> Result<PathBuf, CliError> {
        let p = self.root.join(rel);
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
        }
        self.files.push(p.clone());
        Ok(p)
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, rel: &str, value: &T) -> Result<(), CliError> {
        let p = self.path(rel)?;
        let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        s.push('\n');
        std::fs::write(&p, s).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
    }

    pub fn text(&mut self, rel: &str, body: &str) -> Result<(), CliError> {
        let p = self.path(rel)?;
        std::fs::write(&p, body).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
    }

    /// Marks the end of a stage.
    pub fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.timings.push(Timing {
            stage: stage.into(),
            seconds: (now - self.stage_start).as_secs_f64(),
        });
        self.stage_start = now;
    }

    /// Hashes every recorded file, including snapshot sidecars, into `manifest.json`.
    pub fn finish(mut self, subcommand: &str, config_sha256: &str, seed: u64, exit_code: i32) -> Result<(), CliError> {
        let mut all: Vec<PathBuf> = Vec::new();
        for f in &self.files {
            all.push(f.clone());
            let mut side = f.as_os_str().to_owned();
            side.push(".json");
            let side = PathBuf::from(side);
            if f.extension().is_some_and(|e| e == "bin") && side.exists() {
                all.push(side);
            }
        }
        all.sort();
        all.dedup();
        let mut files = Vec::with_capacity(all.len());
        for f in &all {
            let bytes = std::fs::read(f).map_err(|e| CliError::Io(format!("{}: {e}", f.display())))?;
            files.push(FileEntry {
                path: f.strip_prefix(&self.root).unwrap_or(f).to_string_lossy().replace('\\', "/"),
                bytes: bytes.len() as u64,
                sha256: sha256_hex(&bytes),
            });
        }
        let manifest = Manifest {
            tool: "vortexlab",
            version: env!("CARGO_PKG_VERSION"),
            core_version: vortexlab::VERSION,
            subcommand,
            config_sha256,
            seed,
            exit_code,
            files,
            timings: std::mem::take(&mut self.timings),
        };
        let p = self.root.join("manifest.json");
        let mut s = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
        s.push('\n');
        std::fs::write(&p, s).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
    }
}
