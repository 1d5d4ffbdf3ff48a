use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::seed::sha256_hex;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Written last into every output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    pub seed: u64,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub tool_version: String,
    pub started_unix: u64,
    pub wall_time_secs: f64,
}

/// An output directory known to be writable. Files go through a temporary
/// name and a rename so readers never see a half-written artifact.
pub struct OutDir {
    root: PathBuf,
    written: Vec<FileDigest>,
    started: Instant,
    started_unix: u64,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        let env = |e: std::io::Error| CliError::Env(format!("output directory {}: {e}", root.display()));
        fs::create_dir_all(root).map_err(env)?;
        let probe = root.join(format!(".probe-{}", std::process::id()));
        fs::write(&probe, b"").map_err(env)?;
        fs::remove_file(&probe).map_err(env)?;
        let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        Ok(OutDir { root: root.to_path_buf(), written: Vec::new(), started: Instant::now(), started_unix })
    }

    pub fn written(&self) -> &[FileDigest] {
        &self.written
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let target = self.root.join(name);
        atomic_write(&target, bytes)?;
        self.written.push(FileDigest { path: name.to_string(), sha256: sha256_hex(bytes) });
        Ok(target)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Env(e.to_string()))?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    pub fn finish(self, command: &str, config_digest: String, seed: u64, inputs: Vec<FileDigest>) -> Result<(), CliError> {
        let manifest = RunManifest {
            command: command.to_string(),
            config_digest,
            seed,
            inputs,
            outputs: self.written.clone(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: self.started_unix,
            wall_time_secs: self.started.elapsed().as_secs_f64(),
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Env(e.to_string()))?;
        bytes.push(b'\n');
        atomic_write(&self.root.join(MANIFEST), &bytes)
    }
}

fn atomic_write(target: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let name = target.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = target.with_file_name(format!(".{name}.tmp"));
    let env = |e: std::io::Error| CliError::Env(format!("{}: {e}", target.display()));
    let mut f = fs::File::create(&tmp).map_err(env)?;
    f.write_all(bytes).map_err(env)?;
    f.sync_all().map_err(env)?;
    drop(f);
    fs::rename(&tmp, target).map_err(env)
}

/// Reads an input file and records its digest for the manifest.
pub fn read_input(path: &Path, inputs: &mut Vec<FileDigest>) -> Result<Vec<u8>, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Env(format!("{}: {e}", path.display())))?;
    inputs.push(FileDigest { path: path.display().to_string(), sha256: sha256_hex(&bytes) });
    Ok(bytes)
}
