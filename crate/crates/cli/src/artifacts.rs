//! Writing CSV and JSON artifacts that carry the configuration hash.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::hex;
use crate::run::RunError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArtifactRecord {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Collects every file written during a run, in order.
pub struct Artifacts {
    dir: PathBuf,
    config_hash: String,
    pub records: Vec<ArtifactRecord>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config_hash: &'a str,
    artifact: &'a str,
    data: &'a T,
}

impl Artifacts {
    pub fn create(dir: &Path, config_hash: &str) -> Result<Self, RunError> {
        fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            config_hash: config_hash.to_string(),
            records: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn write(&mut self, name: &str, bytes: Vec<u8>) -> Result<(), RunError> {
        let path = self.dir.join(name);
        fs::write(&path, &bytes).map_err(|e| RunError::io(&path, e))?;
        self.records.retain(|r| r.name != name);
        self.records.push(ArtifactRecord {
            name: name.to_string(),
            bytes: bytes.len(),
            sha256: hex(&Sha256::digest(&bytes)),
        });
        Ok(())
    }

    /// A CSV file whose first line is `# config_hash=<hex>`.
    pub fn csv<I>(&mut self, name: &str, header: &str, rows: I) -> Result<(), RunError>
    where
        I: IntoIterator<Item = String>,
    {
        let mut text = format!("# config_hash={}\n{header}\n", self.config_hash);
        for row in rows {
            text.push_str(&row);
            text.push('\n');
        }
        self.write(name, text.into_bytes())
    }

    /// A CSV file produced by a writer, prefixed with the hash line.
    pub fn csv_with(
        &mut self,
        name: &str,
        fill: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    ) -> Result<(), RunError> {
        let mut buf = format!("# config_hash={}\n", self.config_hash).into_bytes();
        fill(&mut buf).map_err(|e| RunError::io(&self.dir.join(name), e))?;
        self.write(name, buf)
    }

    /// Pretty JSON `{config_hash, artifact, data}`.
    pub fn json<T: Serialize>(&mut self, name: &str, data: &T) -> Result<(), RunError> {
        let env = Envelope {
            config_hash: &self.config_hash,
            artifact: name,
            data,
        };
        let mut text = serde_json::to_string_pretty(&env).expect("artifact serializes");
        text.push('\n');
        self.write(name, text.into_bytes())
    }

    /// Written last and left out of `records`; it holds the wall time and
    /// therefore differs between otherwise identical runs.
    pub fn manifest<T: Serialize>(&self, data: &T) -> Result<(), RunError> {
        let path = self.dir.join(MANIFEST);
        let mut text = serde_json::to_string_pretty(data).expect("manifest serializes");
        text.push('\n');
        fs::write(&path, text).map_err(|e| RunError::io(&path, e))
    }
}

pub const MANIFEST: &str = "manifest.json";
