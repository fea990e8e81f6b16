use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Output directory; every file carries the SHA-256 of the configuration text.
pub struct Output {
    dir: PathBuf,
    hash: String,
}

pub fn config_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

impl Output {
    pub fn new(dir: &Path, config_text: &str) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), hash: config_hash(config_text) })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Comment lines for CSV headers.
    pub fn comments(&self) -> Vec<String> {
        vec![format!("config_sha256={}", self.hash)]
    }

    /// Writes CSV text produced by `body`, which receives the comment lines.
    pub fn write_csv(&self, name: &str, body: impl FnOnce(&[String]) -> String) -> Result<(), CliError> {
        self.write(name, body(&self.comments()))
    }

    /// Writes `{"config_sha256": …, "result": value}`.
    pub fn write_json(&self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        #[derive(Serialize)]
        struct Wrapped<'a, T> {
            config_sha256: &'a str,
            result: &'a T,
        }
        let text = serde_json::to_string_pretty(&Wrapped { config_sha256: &self.hash, result: value })
            .map_err(|e| CliError::Numerics(e.to_string()))?;
        self.write(name, text + "\n")
    }

    fn write(&self, name: &str, text: String) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, text).map_err(|e| CliError::Numerics(format!("{}: {e}", path.display())))
    }
}
