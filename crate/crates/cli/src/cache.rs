//! Stage artifacts are stored next to a `.key` file holding the hash of the
//! configuration and inputs that produced them. A stage whose key matches
//! is skipped.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub struct StageKey(String);

impl StageKey {
    /// Hash of the stage name, its parameters and the bytes of every input.
    pub fn new(stage: &str, params: &impl Serialize, inputs: &[&Path]) -> Result<Self, CliError> {
        let mut h = Sha256::new();
        h.update(stage.as_bytes());
        h.update([0]);
        let json = serde_json::to_vec(params).map_err(|e| CliError::Config(e.to_string()))?;
        h.update(&json);
        for path in inputs {
            let bytes = std::fs::read(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
            h.update([0]);
            h.update(Sha256::digest(&bytes));
        }
        Ok(StageKey(hex::encode(h.finalize())))
    }

    fn key_path(artifact: &Path) -> PathBuf {
        let mut name = artifact.file_name().unwrap_or_default().to_os_string();
        name.push(".key");
        artifact.with_file_name(name)
    }

    /// True when `artifact` exists and was written under this key.
    pub fn is_fresh(&self, artifact: &Path) -> bool {
        artifact.exists() && std::fs::read_to_string(Self::key_path(artifact)).is_ok_and(|k| k.trim() == self.0)
    }

    pub fn record(&self, artifact: &Path) -> Result<(), CliError> {
        let path = Self::key_path(artifact);
        std::fs::write(&path, format!("{}\n", self.0)).map_err(|e| CliError::Io(path, e))
    }
}
