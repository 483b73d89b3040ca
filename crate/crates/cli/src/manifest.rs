//! Experiment manifests: what ran, with which inputs, and the hash of every output.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Version reported in manifests and reports; a `git describe` string may be
/// supplied at build time through `GMC_VERSION`.
pub const TOOL_VERSION: &str = match option_env!("GMC_VERSION") {
    Some(v) => v,
    None => concat!("v", env!("CARGO_PKG_VERSION")),
};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputEntry {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
}

/// How to rerun: subcommand and its positional argument.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Invocation {
    pub subcommand: String,
    pub argument: Option<String>,
    /// Hash of an input file (render), checked on replay.
    pub input_sha256: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub tool_version: String,
    pub invocation: Invocation,
    pub master_seed: u64,
    pub config_digest: String,
    /// Effective configuration in canonical `key=value` form.
    pub config: String,
    pub replica_count: u64,
    pub outputs: Vec<OutputEntry>,
    /// False when some experiment failed; outputs then list only what was written.
    pub complete: bool,
    pub warnings: Vec<String>,
}

impl ExperimentManifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn json_round_trip() {
        let m = ExperimentManifest {
            tool_version: TOOL_VERSION.into(),
            invocation: Invocation {
                subcommand: "analyze".into(),
                argument: None,
                input_sha256: None,
            },
            master_seed: u64::MAX,
            config_digest: sha256_hex(b""),
            config: "run.seed=1\n".into(),
            replica_count: 3,
            outputs: vec![],
            complete: true,
            warnings: vec![],
        };
        assert_eq!(ExperimentManifest::from_json(&m.to_json()).unwrap(), m);
    }
}
