//! Run manifests, provenance stamps and file helpers.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{CliError, CliResult};

/// Everything that determines the output of one command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineManifest {
    pub command: String,
    pub surface: Option<String>,
    pub curves: Option<String>,
    pub degree: Option<usize>,
    pub oversample: Option<usize>,
    pub bits: u32,
    pub seed: u64,
    pub out_dir: String,
    /// SHA-256 of every input file, keyed by path as given.
    pub inputs: BTreeMap<String, String>,
    /// Remaining command options, rendered as strings.
    pub options: BTreeMap<String, String>,
}

impl PipelineManifest {
    pub fn new(command: &str, bits: u32, seed: u64, out_dir: &Path) -> Self {
        PipelineManifest {
            command: command.to_string(),
            surface: None,
            curves: None,
            degree: None,
            oversample: None,
            bits,
            seed,
            out_dir: out_dir.display().to_string(),
            inputs: BTreeMap::new(),
            options: BTreeMap::new(),
        }
    }

    /// Reads an input file, recording its hash.
    pub fn read_input(&mut self, path: &Path) -> CliResult<String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read input {}: {e}", path.display())))?;
        self.inputs.insert(path.display().to_string(), sha256_hex(text.as_bytes()));
        Ok(text)
    }

    pub fn option(&mut self, key: &str, value: impl ToString) {
        self.options.insert(key.to_string(), value.to_string());
    }

    /// Rejects precisions too low for the requested degree.
    pub fn validate(&self) -> CliResult<()> {
        if let Some(n) = self.degree {
            if n >= 50 && self.bits < 128 {
                return Err(CliError::Usage(format!("degree {n} needs at least 128 bits, got {}", self.bits)));
            }
        }
        Ok(())
    }

    pub fn sha256(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("manifest serializes"))
    }

    pub fn provenance(&self, guard_bits: u32) -> Provenance {
        Provenance {
            manifest: self.clone(),
            manifest_sha256: self.sha256(),
            bits: self.bits,
            guard_bits,
        }
    }
}

/// Stamp embedded in every JSON artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub manifest: PipelineManifest,
    pub manifest_sha256: String,
    pub bits: u32,
    pub guard_bits: u32,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })?;
    }
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: DeserializeOwned>(manifest: &mut PipelineManifest, path: &Path) -> CliResult<T> {
    let text = manifest.read_input(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("malformed {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_tracks_every_field() {
        let a = PipelineManifest::new("forms", 256, 1, Path::new("out"));
        let mut b = a.clone();
        assert_eq!(a.sha256(), b.sha256());
        b.seed = 2;
        assert_ne!(a.sha256(), b.sha256());
    }

    #[test]
    fn high_degree_needs_precision() {
        let mut m = PipelineManifest::new("forms", 96, 1, Path::new("."));
        m.degree = Some(50);
        assert!(m.validate().is_err());
        m.bits = 128;
        assert!(m.validate().is_ok());
    }

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
