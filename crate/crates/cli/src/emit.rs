use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{Format, RunConfig};
use crate::CliError;

#[derive(Serialize)]
struct ManifestEntry {
    file: String,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config_sha256: &'a str,
    files: &'a [ManifestEntry],
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes the products of one command into a directory and records them in
/// `manifest.json`.
pub struct Emitter {
    dir: PathBuf,
    command: String,
    config_hash: String,
    csv: bool,
    json: bool,
    files: Vec<ManifestEntry>,
}

impl Emitter {
    /// Creates the directory and writes `resolved_config.json`.
    pub fn new(dir: &Path, command: &str, cfg: &RunConfig) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
        let resolved = to_json(cfg)?;
        let mut em = Self {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            config_hash: sha256_hex(&resolved),
            csv: cfg.wants(Format::Csv),
            json: cfg.wants(Format::Json),
            files: Vec::new(),
        };
        em.write_bytes("resolved_config.json", &resolved)?;
        Ok(em)
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        self.files.push(ManifestEntry {
            file: name.to_string(),
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), CliError> {
        if !self.csv {
            return Ok(());
        }
        let text = riemann_ifs::output::csv_string(rows).map_err(CliError::from)?;
        self.write_bytes(name, text.as_bytes())
    }

    /// Product JSON, skipped when the json format is off.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        if !self.json {
            return Ok(());
        }
        let bytes = to_json(value)?;
        self.write_bytes(name, &bytes)
    }

    /// JSON that is always written (hypothesis reports).
    pub fn always_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let bytes = to_json(value)?;
        self.write_bytes(name, &bytes)
    }

    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        let manifest = Manifest {
            command: &self.command,
            config_sha256: &self.config_hash,
            files: &self.files,
        };
        let bytes = to_json(&manifest)?;
        let path = self.dir.join("manifest.json");
        fs::write(&path, bytes).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        self.files.clear();
        Ok(self.dir)
    }
}

fn to_json<T: Serialize + ?Sized>(v: &T) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec_pretty(v).map_err(|e| CliError::Runtime(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}
