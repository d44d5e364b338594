use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::run::{RunRecord, RUN_SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::panel::{AnnotationRecord, JudgeKind, PanelMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedRuns {
    pub records: Vec<RunRecord>,
    pub warnings: Vec<String>,
}

fn write_lines(file: std::fs::File, path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Appends records, one JSON object per line.
pub fn append_runs(path: &Path, records: &[RunRecord]) -> Result<()> {
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    write_lines(file, path, records)
}

/// Writes a fresh store, replacing any existing file.
pub fn write_runs(path: &Path, records: &[RunRecord]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_lines(file, path, records)
}

/// Reads a store. Lines that do not parse, or carry another schema
/// version, are skipped with a warning naming the line.
pub fn load_runs(path: &Path) -> Result<LoadedRuns> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<RunRecord>(&line) {
            Ok(r) if r.schema_version == RUN_SCHEMA_VERSION => records.push(r),
            Ok(r) => warnings.push(format!(
                "{}:{}: schema version {} (expected {RUN_SCHEMA_VERSION}), skipped",
                path.display(),
                n + 1,
                r.schema_version
            )),
            Err(e) => warnings.push(format!("{}:{}: corrupt record skipped ({e})", path.display(), n + 1)),
        }
    }
    Ok(LoadedRuns { records, warnings })
}

/// Panel view of run records: judge = endpoint id, configuration =
/// strategy fingerprint. Failed runs leave a hole and a warning; when the
/// same cell was run more than once the latest record wins.
pub fn runs_to_panel(records: &[RunRecord]) -> Result<(PanelMatrix, Vec<String>)> {
    let mut warnings = Vec::new();
    let mut panel = PanelMatrix::new();
    let mut cells: BTreeMap<(String, String, String), &RunRecord> = BTreeMap::new();
    for r in records {
        panel.declare_interview(&r.interview_id);
        panel.declare_judge(&r.endpoint_id, JudgeKind::Model)?;
        let key = (r.interview_id.clone(), r.endpoint_id.clone(), r.strategy_fingerprint.clone());
        if cells.insert(key, r).is_some() {
            warnings.push(format!(
                "{} / {} / {}: several runs, keeping the last",
                r.interview_id, r.endpoint_id, r.strategy_fingerprint
            ));
        }
    }
    for ((interview, endpoint, config), r) in cells {
        match &r.parsed {
            Some(ranking) => panel.insert(AnnotationRecord {
                interview_id: interview,
                judge_id: endpoint,
                judge_kind: JudgeKind::Model,
                config_id: Some(config),
                ranking: ranking.clone(),
            })?,
            None => warnings.push(format!(
                "{interview} / {endpoint} / {config}: failed run ({}), no judgment",
                r.failure.as_ref().map_or("unknown", |f| f.message.as_str())
            )),
        }
    }
    Ok((panel, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::endpoint::{ChatRequest, Endpoint, TransportError};
    use crate::harness::prompt::{PromptStrategy, PromptTemplates};
    use crate::harness::run::{run_interview, Interview, RunContext};
    use crate::taxonomy::ValueTaxonomy;

    struct Fixed(&'static str);

    impl Endpoint for Fixed {
        fn id(&self) -> &str {
            "fixed"
        }
        fn model(&self) -> &str {
            "m"
        }
        fn complete(&self, _: &ChatRequest) -> std::result::Result<String, TransportError> {
            Ok(self.0.to_string())
        }
    }

    fn records() -> Vec<RunRecord> {
        let tax = ValueTaxonomy::bundled();
        let tpl = PromptTemplates::bundled();
        let ctx = RunContext::new(&tax, &tpl);
        let ep = Fixed("1. Power\n2. Security\n3. Wealth? no: Achievement\n");
        ["a", "b", "c"]
            .iter()
            .map(|id| {
                let i = Interview { id: id.to_string(), transcript: "Text.".into(), profile: None };
                run_interview(&ep, &"baseline-S".parse::<PromptStrategy>().unwrap(), &i, &ctx)
            })
            .collect()
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("runs.jsonl");
        let recs = records();
        write_runs(&p, &recs).unwrap();
        let loaded = load_runs(&p).unwrap();
        assert_eq!(loaded.records, recs);
        assert!(loaded.warnings.is_empty());
    }

    #[test]
    fn corrupt_line_is_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("runs.jsonl");
        let recs = records();
        append_runs(&p, &recs[..1]).unwrap();
        std::fs::OpenOptions::new().append(true).open(&p).unwrap().write_all(b"{\"oops\n").unwrap();
        append_runs(&p, &recs[1..]).unwrap();
        let loaded = load_runs(&p).unwrap();
        assert_eq!(loaded.records.len(), 3);
        assert_eq!(loaded.warnings.len(), 1);
        assert!(loaded.warnings[0].contains(":2:"));
    }

    #[test]
    fn panel_view() {
        let recs = records();
        let (panel, warnings) = runs_to_panel(&recs).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(panel.len(), 3);
        assert_eq!(panel.model_configs(), ["baseline-S"]);
        assert_eq!(panel.judge_kind("fixed"), Some(JudgeKind::Model));
    }
}
