use std::path::{Path, PathBuf};

use serde::Serialize;

use super::manifest::RunManifest;
use crate::error::{Error, Result};

/// Writes report artifacts into one directory, each stamped with the
/// manifest hash.
pub struct Artifacts {
    dir: PathBuf,
    manifest: RunManifest,
    hash: String,
    written: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    manifest: &'a RunManifest,
    manifest_sha256: &'a str,
    report: &'a T,
}

/// Score in [0, 1] as a percentage with two decimals.
pub fn pct(x: f64) -> String {
    format!("{:.2}", x * 100.0)
}

pub fn num(x: f64) -> String {
    format!("{x:.6}")
}

pub fn opt(x: Option<f64>, f: fn(f64) -> String) -> String {
    x.map(f).unwrap_or_default()
}

impl Artifacts {
    pub fn new(dir: &Path, manifest: RunManifest) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let hash = manifest.hash();
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            manifest,
            hash,
            written: Vec::new(),
        })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, report: &T) -> Result<()> {
        let env = Envelope {
            manifest: &self.manifest,
            manifest_sha256: &self.hash,
            report,
        };
        let mut bytes = serde_json::to_vec_pretty(&env)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut bytes = format!("# manifest_sha256={}\n", self.hash).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut bytes);
            w.write_record(header)?;
            for r in rows {
                w.write_record(r)?;
            }
            w.flush().map_err(|e| Error::io(self.dir.join(name), e))?;
        }
        self.write(name, &bytes)
    }

    pub fn svg(&mut self, name: &str, svg: &str) -> Result<()> {
        let stamp = format!("<metadata>manifest_sha256={}</metadata>", self.hash);
        let out = match svg.find("<svg").and_then(|s| svg[s..].find('>').map(|e| s + e + 1)) {
            Some(at) => format!("{}\n{stamp}{}", &svg[..at], &svg[at..]),
            None => return Err(Error::InvalidArgument("chart is not an SVG document".into())),
        };
        self.write(name, out.as_bytes())
    }

    /// Writes `manifest.json` and returns every path written.
    pub fn finish(mut self) -> Result<Vec<PathBuf>> {
        let mut bytes = serde_json::to_vec_pretty(&self.manifest)?;
        bytes.push(b'\n');
        self.write("manifest.json", &bytes)?;
        Ok(self.written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn every_artifact_is_stamped() {
        let dir = tempfile::tempdir().unwrap();
        let m = RunManifest {
            tool: "valign".into(),
            version: "0".into(),
            command: "test".into(),
            inputs: vec![],
            output_dir: "x".into(),
            k: 3,
            rbo_p: 0.9,
            depth_policy: "strict".into(),
            alpha_distance: "jaccard".into(),
            tie_policy: "lexicographic".into(),
            bootstrap_replicates: 100,
            seed: 1,
            extra: BTreeMap::new(),
        };
        let mut a = Artifacts::new(dir.path(), m).unwrap();
        let h = a.hash().to_string();
        a.json("r.json", &vec![1, 2]).unwrap();
        a.csv("r.csv", &["a", "b"], &[vec!["1".into(), "2".into()]]).unwrap();
        a.svg("r.svg", r#"<svg width="1"><rect/></svg>"#).unwrap();
        let files = a.finish().unwrap();
        assert_eq!(files.len(), 4);
        for f in &files[..3] {
            assert!(std::fs::read_to_string(f).unwrap().contains(&h));
        }
        let csv = std::fs::read_to_string(&files[1]).unwrap();
        assert_eq!(csv, format!("# manifest_sha256={h}\na,b\n1,2\n"));
        assert_eq!(pct(0.56601), "56.60");
    }
}
