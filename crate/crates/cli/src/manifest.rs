use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use roughvol::market_data::write_atomic;

use crate::error::{CliError, CliResult};

pub const MANIFEST_SCHEMA: &str = "roughvol-manifest";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> CliResult<Self> {
        Ok(FileDigest {
            path: path.to_path_buf(),
            sha256: sha256_file(path)?,
        })
    }
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// What a command read, wrote and ran with. No timestamps, so a rerun with
/// the same config writes an identical manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub version: u32,
    pub toolkit_version: String,
    pub command: String,
    /// Resolved settings of the command, seeds included.
    pub config: serde_json::Value,
    /// Worker threads requested, if any. Results do not depend on it.
    pub threads: Option<usize>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

impl RunManifest {
    pub fn new(command: &str, config: &impl Serialize, threads: Option<usize>) -> CliResult<Self> {
        Ok(RunManifest {
            schema: MANIFEST_SCHEMA.into(),
            version: MANIFEST_VERSION,
            toolkit_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config: serde_json::to_value(config).map_err(|e| CliError::usage(e.to_string()))?,
            threads,
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    pub fn check_schema(&self) -> CliResult<()> {
        if self.schema != MANIFEST_SCHEMA || self.version != MANIFEST_VERSION {
            return Err(CliError::data(format!(
                "expected {MANIFEST_SCHEMA} v{MANIFEST_VERSION}, found {} v{}",
                self.schema, self.version
            )));
        }
        Ok(())
    }

    pub fn input(&mut self, path: &Path) -> CliResult<()> {
        self.inputs.push(FileDigest::of(path)?);
        Ok(())
    }

    pub fn output(&mut self, path: &Path) -> CliResult<()> {
        self.outputs.push(FileDigest::of(path)?);
        Ok(())
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| CliError::usage(e.to_string()))?;
        text.push('\n');
        Ok(write_atomic(path, text.as_bytes())?)
    }

    /// Files whose current digest differs from the recorded one.
    pub fn stale_files(&self) -> Vec<(PathBuf, String)> {
        self.inputs
            .iter()
            .chain(&self.outputs)
            .filter_map(|f| match sha256_file(&f.path) {
                Ok(d) if d == f.sha256 => None,
                Ok(_) => Some((f.path.clone(), "digest changed".into())),
                Err(e) => Some((f.path.clone(), e.message)),
            })
            .collect()
    }
}
