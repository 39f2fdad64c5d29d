//! Run manifests: the settings that determine a command's output files.

use std::fs;
use std::path::{Path, PathBuf};

use diagsre::config::ModelSpec;
use diagsre::error::Result;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.toml";

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex(&Sha256::digest(data))
}

/// Everything that feeds the output bytes. Worker count and output
/// directory are left out on purpose: they never change file contents.
#[derive(Debug, Clone, Serialize)]
pub struct RunSpec {
    pub tool_version: String,
    pub command: String,
    pub config_path: Option<String>,
    pub model_hash: String,
    pub seed: u64,
    pub length: u64,
    pub burn_in: u64,
    pub tail: f64,
    pub bins: usize,
    pub absolute: bool,
    pub force: bool,
    /// Command-specific settings as `key=value` strings.
    pub extra: Vec<String>,
    pub model: ModelSpec,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub manifest_hash: String,
    pub outdir: String,
    pub workers: usize,
    pub run: RunSpec,
}

impl RunManifest {
    pub fn new(run: RunSpec, outdir: &Path, workers: usize) -> Self {
        let body = toml::to_string(&run).expect("manifest serializes");
        RunManifest {
            manifest_hash: sha256_hex(body.as_bytes()),
            outdir: outdir.display().to_string(),
            workers,
            run,
        }
    }

    /// Creates the output directory and writes the manifest into it.
    pub fn write(&self) -> Result<PathBuf> {
        let dir = Path::new(&self.outdir);
        fs::create_dir_all(dir)?;
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, toml::to_string(self).expect("manifest serializes"))?;
        Ok(path)
    }

    /// Writes `name` under the output directory with the manifest hash as the first line.
    pub fn write_tagged(&self, name: &str, body: &str) -> Result<PathBuf> {
        let path = Path::new(&self.outdir).join(name);
        fs::write(&path, format!("# manifest={}\n{body}", self.manifest_hash))?;
        Ok(path)
    }

    pub fn write_plain(&self, name: &str, body: &[u8]) -> Result<PathBuf> {
        let path = Path::new(&self.outdir).join(name);
        fs::write(&path, body)?;
        Ok(path)
    }
}

pub fn model_hash(model: &ModelSpec) -> String {
    let body = toml::to_string(model).expect("model serializes");
    sha256_hex(body.as_bytes())
}
