use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputFile {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

/// Everything that determines an invocation's outputs. Serialized into
/// every artifact so a report can be traced back to its inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub inputs: Vec<InputFile>,
    pub output_dir: String,
    pub k: usize,
    pub rbo_p: f64,
    pub depth_policy: String,
    pub alpha_distance: String,
    pub tie_policy: String,
    pub bootstrap_replicates: usize,
    pub seed: u64,
    /// Subcommand-specific settings.
    pub extra: BTreeMap<String, String>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn add_input(&mut self, role: &str, path: &Path) -> Result<()> {
        self.inputs.push(InputFile {
            role: role.into(),
            path: path.display().to_string(),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.extra.insert(key.into(), value.to_string());
    }

    /// SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("manifest serializes");
        format!("{:x}", Sha256::digest(&json))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest() -> RunManifest {
        RunManifest {
            tool: "valign".into(),
            version: "0".into(),
            command: "evaluate".into(),
            inputs: vec![],
            output_dir: "out".into(),
            k: 3,
            rbo_p: 0.9,
            depth_policy: "strict".into(),
            alpha_distance: "jaccard".into(),
            tie_policy: "mean-rank-then-lexicographic".into(),
            bootstrap_replicates: 10_000,
            seed: 0,
            extra: BTreeMap::new(),
        }
    }

    #[test]
    fn hash_tracks_content() {
        let a = manifest();
        let mut b = manifest();
        assert_eq!(a.hash(), b.hash());
        b.set("method", "borda");
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
