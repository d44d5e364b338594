//! Annotation records and the interview x judge panel.
//!
//! A panel column is a judge under one configuration: experts have a single
//! column each, a model has one column per prompt/segmentation configuration.
//! Panels may be sparse; analyses that need completeness check for it
//! explicitly and report what is missing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranking::{Ranking, ValueId};
use crate::taxonomy::ValueTaxonomy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JudgeKind {
    Expert,
    Model,
}

impl fmt::Display for JudgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JudgeKind::Expert => "expert",
            JudgeKind::Model => "model",
        })
    }
}

impl std::str::FromStr for JudgeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "expert" => Ok(JudgeKind::Expert),
            "model" => Ok(JudgeKind::Model),
            other => Err(Error::Panel(format!("unknown judge kind `{other}`"))),
        }
    }
}

/// One panel column: a judge, optionally under a configuration.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Column {
    pub judge_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_id: Option<String>,
}

impl Column {
    pub fn expert(judge_id: impl Into<String>) -> Self {
        Column {
            judge_id: judge_id.into(),
            config_id: None,
        }
    }

    pub fn model(judge_id: impl Into<String>, config_id: impl Into<String>) -> Self {
        Column {
            judge_id: judge_id.into(),
            config_id: Some(config_id.into()),
        }
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.config_id {
            Some(c) => write!(f, "{}@{}", self.judge_id, c),
            None => f.write_str(&self.judge_id),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub interview_id: String,
    pub judge_id: String,
    pub judge_kind: JudgeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_id: Option<String>,
    pub ranking: Ranking,
}

impl AnnotationRecord {
    pub fn column(&self) -> Column {
        Column {
            judge_id: self.judge_id.clone(),
            config_id: self.config_id.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PanelMatrix {
    interviews: Vec<String>,
    judges: BTreeMap<String, JudgeKind>,
    cells: BTreeMap<(String, Column), Ranking>,
}

impl PanelMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records(records: impl IntoIterator<Item = AnnotationRecord>) -> Result<Self> {
        let mut panel = PanelMatrix::new();
        for rec in records {
            panel.insert(rec)?;
        }
        Ok(panel)
    }

    /// Declares an interview without adding any cell.
    pub fn declare_interview(&mut self, interview_id: &str) {
        if !self.interviews.iter().any(|i| i == interview_id) {
            self.interviews.push(interview_id.to_string());
        }
    }

    pub fn declare_judge(&mut self, judge_id: &str, kind: JudgeKind) -> Result<()> {
        match self.judges.get(judge_id) {
            Some(k) if *k != kind => Err(Error::Panel(format!(
                "judge `{judge_id}` declared as both {k} and {kind}"
            ))),
            _ => {
                self.judges.insert(judge_id.to_string(), kind);
                Ok(())
            }
        }
    }

    pub fn insert(&mut self, rec: AnnotationRecord) -> Result<()> {
        match (rec.judge_kind, &rec.config_id) {
            (JudgeKind::Model, None) => {
                return Err(Error::Panel(format!(
                    "model judge `{}` needs a config_id",
                    rec.judge_id
                )))
            }
            (JudgeKind::Expert, Some(_)) => {
                return Err(Error::Panel(format!(
                    "expert judge `{}` must not carry a config_id",
                    rec.judge_id
                )))
            }
            _ => {}
        }
        self.declare_judge(&rec.judge_id, rec.judge_kind)?;
        self.declare_interview(&rec.interview_id);
        let key = (rec.interview_id.clone(), rec.column());
        if self.cells.contains_key(&key) {
            return Err(Error::Panel(format!(
                "duplicate cell ({}, {})",
                key.0, key.1
            )));
        }
        self.cells.insert(key, rec.ranking);
        Ok(())
    }

    /// Adds every cell of `other`; overlapping cells are an error.
    pub fn merge(&mut self, other: &PanelMatrix) -> Result<()> {
        for i in &other.interviews {
            self.declare_interview(i);
        }
        for (j, k) in &other.judges {
            self.declare_judge(j, *k)?;
        }
        for rec in other.records() {
            self.insert(rec)?;
        }
        Ok(())
    }

    pub fn interviews(&self) -> &[String] {
        &self.interviews
    }

    pub fn judges(&self) -> impl Iterator<Item = (&str, JudgeKind)> {
        self.judges.iter().map(|(j, k)| (j.as_str(), *k))
    }

    pub fn judge_kind(&self, judge_id: &str) -> Option<JudgeKind> {
        self.judges.get(judge_id).copied()
    }

    pub fn judges_of_kind(&self, kind: JudgeKind) -> Vec<String> {
        self.judges
            .iter()
            .filter(|(_, k)| **k == kind)
            .map(|(j, _)| j.clone())
            .collect()
    }

    /// All distinct columns, sorted.
    pub fn columns(&self) -> Vec<Column> {
        let set: BTreeSet<&Column> = self.cells.keys().map(|(_, c)| c).collect();
        set.into_iter().cloned().collect()
    }

    pub fn expert_columns(&self) -> Vec<Column> {
        self.judges_of_kind(JudgeKind::Expert)
            .into_iter()
            .map(Column::expert)
            .collect()
    }

    /// Configurations under which `judge_id` has at least one cell, sorted.
    pub fn configs_of(&self, judge_id: &str) -> Vec<String> {
        let set: BTreeSet<&String> = self
            .cells
            .keys()
            .filter(|(_, c)| c.judge_id == judge_id)
            .filter_map(|(_, c)| c.config_id.as_ref())
            .collect();
        set.into_iter().cloned().collect()
    }

    /// All model configurations present in the panel, sorted.
    pub fn model_configs(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self
            .cells
            .keys()
            .filter_map(|(_, c)| c.config_id.as_ref())
            .collect();
        set.into_iter().cloned().collect()
    }

    pub fn get(&self, interview_id: &str, column: &Column) -> Option<&Ranking> {
        // BTreeMap lookup needs an owned key; panels are small.
        self.cells
            .get(&(interview_id.to_string(), column.clone()))
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// `(interview, column)` pairs with no cell, over the given columns.
    pub fn missing(&self, columns: &[Column]) -> Vec<(String, Column)> {
        let mut out = Vec::new();
        for i in &self.interviews {
            for c in columns {
                if self.get(i, c).is_none() {
                    out.push((i.clone(), c.clone()));
                }
            }
        }
        out
    }

    /// Records in interview declaration order, then column order.
    pub fn records(&self) -> Vec<AnnotationRecord> {
        let mut out = Vec::with_capacity(self.cells.len());
        for i in &self.interviews {
            for ((ci, col), ranking) in self
                .cells
                .range((i.clone(), min_column())..)
                .take_while(|((ci, _), _)| ci == i)
            {
                out.push(AnnotationRecord {
                    interview_id: ci.clone(),
                    judge_id: col.judge_id.clone(),
                    judge_kind: self.judges[&col.judge_id],
                    config_id: col.config_id.clone(),
                    ranking: ranking.clone(),
                });
            }
        }
        out
    }

    /// Sub-panel restricted to the given columns (interviews are kept).
    pub fn select(&self, columns: &[Column]) -> PanelMatrix {
        let keep: BTreeSet<&Column> = columns.iter().collect();
        let mut out = PanelMatrix {
            interviews: self.interviews.clone(),
            ..Default::default()
        };
        for rec in self.records() {
            if keep.contains(&rec.column()) {
                out.insert(rec).expect("subset of a valid panel");
            }
        }
        out
    }

    pub fn validate(&self, taxonomy: &ValueTaxonomy) -> Result<()> {
        for ((i, c), r) in &self.cells {
            taxonomy
                .validate_ranking(r)
                .map_err(|e| Error::Panel(format!("cell ({i}, {c}): {e}")))?;
        }
        Ok(())
    }

    pub fn read_json(reader: impl Read) -> Result<Self> {
        let records: Vec<AnnotationRecord> = serde_json::from_reader(reader)?;
        Self::from_records(records)
    }

    pub fn write_json(&self, mut writer: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(&mut writer, &self.records())?;
        writer.write_all(b"\n").map_err(|e| Error::io("<panel json>", e))?;
        Ok(())
    }

    pub fn read_csv(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| -> Result<usize> {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::Panel(format!("missing column `{name}`")))
        };
        let (ii, ji, ki, ci) = (
            col("interview_id")?,
            col("judge_id")?,
            col("judge_kind")?,
            col("config_id")?,
        );
        let mut rank_cols: Vec<(usize, usize)> = headers
            .iter()
            .enumerate()
            .filter_map(|(pos, h)| {
                h.trim()
                    .strip_prefix("rank")
                    .and_then(|n| n.parse::<usize>().ok())
                    .map(|n| (n, pos))
            })
            .collect();
        rank_cols.sort();
        if rank_cols.is_empty() || rank_cols.iter().enumerate().any(|(i, (n, _))| *n != i + 1) {
            return Err(Error::Panel("rank columns must be rank1..rankN".into()));
        }

        let mut panel = PanelMatrix::new();
        for (line, row) in rdr.records().enumerate() {
            let row = row?;
            let mut items = Vec::new();
            let mut ended = false;
            for (n, pos) in &rank_cols {
                let cell = row.get(*pos).unwrap_or("").trim();
                if cell.is_empty() {
                    ended = true;
                } else if ended {
                    return Err(Error::Panel(format!(
                        "row {}: rank{n} follows an empty rank cell",
                        line + 2
                    )));
                } else {
                    items.push(ValueId::new(cell));
                }
            }
            let config = row[ci].trim();
            let rec = AnnotationRecord {
                interview_id: row[ii].trim().to_string(),
                judge_id: row[ji].trim().to_string(),
                judge_kind: row[ki].parse()?,
                config_id: (!config.is_empty()).then(|| config.to_string()),
                ranking: Ranking::new(items)
                    .map_err(|e| Error::Panel(format!("row {}: {e}", line + 2)))?,
            };
            panel.insert(rec)?;
        }
        Ok(panel)
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let records = self.records();
        let width = records
            .iter()
            .map(|r| r.ranking.len())
            .max()
            .unwrap_or(0)
            .max(10);
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = ["interview_id", "judge_id", "judge_kind", "config_id"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        header.extend((1..=width).map(|i| format!("rank{i}")));
        w.write_record(&header)?;
        for r in &records {
            let mut row = vec![
                r.interview_id.clone(),
                r.judge_id.clone(),
                r.judge_kind.to_string(),
                r.config_id.clone().unwrap_or_default(),
            ];
            row.extend(r.ranking.items().iter().map(|v| v.to_string()));
            row.resize(4 + width, String::new());
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<panel csv>", e))?;
        Ok(())
    }

    /// Loads a `.json` or `.csv` panel file.
    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::read_json(std::io::BufReader::new(file)),
            _ => Self::read_csv(file),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let w = std::io::BufWriter::new(file);
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => self.write_json(w),
            _ => self.write_csv(w),
        }
    }
}

fn min_column() -> Column {
    Column {
        judge_id: String::new(),
        config_id: None,
    }
}
