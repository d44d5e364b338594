use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::taxonomy::ValueTaxonomy;

pub const BUNDLED_TEMPLATES: &str = include_str!("../../data/prompt_templates.toml");

/// Prompting technique layered on top of the baseline instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Technique {
    /// Bias constraint: objectivity clause.
    Bc,
    /// Profile-enhanced: interviewee background prepended.
    Pep,
    /// Bottom-up: rank subvalues first, then aggregate.
    Bup,
}

impl Technique {
    pub fn name(self) -> &'static str {
        match self {
            Technique::Bc => "bc",
            Technique::Pep => "pep",
            Technique::Bup => "bup",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Segmentation {
    Whole,
    Split,
}

impl Segmentation {
    pub fn code(self) -> &'static str {
        match self {
            Segmentation::Whole => "W",
            Segmentation::Split => "S",
        }
    }
}

/// How segment outputs are handed to the aggregation call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregationInput {
    /// Parsed per-segment rankings.
    #[default]
    Rankings,
    /// Raw per-segment responses.
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptStrategy {
    /// Empty means the plain baseline prompt.
    pub techniques: BTreeSet<Technique>,
    pub segmentation: Segmentation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_summary: Option<String>,
    #[serde(default)]
    pub aggregation_input: AggregationInput,
}

impl PromptStrategy {
    pub fn new(techniques: impl IntoIterator<Item = Technique>, segmentation: Segmentation) -> Self {
        PromptStrategy {
            techniques: techniques.into_iter().collect(),
            segmentation,
            profile_summary: None,
            aggregation_input: AggregationInput::default(),
        }
    }

    pub fn with_profile(mut self, profile: impl Into<String>) -> Self {
        self.profile_summary = Some(profile.into());
        self
    }

    pub fn has(&self, t: Technique) -> bool {
        self.techniques.contains(&t)
    }

    /// Stable identifier, e.g. `baseline-W` or `bc+pep-S`.
    pub fn fingerprint(&self) -> String {
        let kind = if self.techniques.is_empty() {
            "baseline".to_string()
        } else {
            self.techniques.iter().map(|t| t.name()).collect::<Vec<_>>().join("+")
        };
        format!("{kind}-{}", self.segmentation.code())
    }

    /// The four technique sets {baseline, bc+pep, pep, bup}, each in whole
    /// and split mode.
    pub fn standard_grid() -> Vec<PromptStrategy> {
        let kinds: [&[Technique]; 4] = [
            &[],
            &[Technique::Bc, Technique::Pep],
            &[Technique::Pep],
            &[Technique::Bup],
        ];
        let mut out = Vec::new();
        for seg in [Segmentation::Whole, Segmentation::Split] {
            for k in kinds {
                out.push(PromptStrategy::new(k.iter().copied(), seg));
            }
        }
        out
    }

    pub fn validate(&self, taxonomy: &ValueTaxonomy) -> Result<()> {
        if self.has(Technique::Pep)
            && self.profile_summary.as_deref().is_none_or(|p| p.trim().is_empty())
        {
            return Err(Error::Prompt(format!(
                "{} needs a profile summary",
                self.fingerprint()
            )));
        }
        if self.has(Technique::Bup) && taxonomy.subvalues().is_empty() {
            return Err(Error::Prompt(format!(
                "{} needs a taxonomy with subvalues",
                self.fingerprint()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for PromptStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fingerprint())
    }
}

impl FromStr for PromptStrategy {
    type Err = Error;

    /// Parses a fingerprint such as `bc+pep-W`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Prompt(format!("bad strategy `{s}`, expected e.g. `bc+pep-W`"));
        let (kind, seg) = s.rsplit_once('-').ok_or_else(bad)?;
        let segmentation = match seg {
            "W" | "w" | "whole" => Segmentation::Whole,
            "S" | "s" | "split" => Segmentation::Split,
            _ => return Err(bad()),
        };
        let mut techniques = BTreeSet::new();
        if kind != "baseline" {
            for part in kind.split('+') {
                techniques.insert(match part {
                    "bc" => Technique::Bc,
                    "pep" => Technique::Pep,
                    "bup" => Technique::Bup,
                    _ => return Err(bad()),
                });
            }
        }
        Ok(PromptStrategy {
            techniques,
            segmentation,
            profile_summary: None,
            aggregation_input: AggregationInput::default(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateSet {
    pub version: String,
    pub system: String,
    pub baseline: String,
    pub bc_clause: String,
    pub pep_prefix: String,
    pub bup: String,
    pub format: String,
    pub segment_note: String,
    pub aggregation_rankings: String,
    pub aggregation_text: String,
}

/// Versioned prompt templates with the hash of their source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplates {
    set: TemplateSet,
    hash: String,
}

impl PromptTemplates {
    pub fn bundled() -> Self {
        Self::from_toml(BUNDLED_TEMPLATES).expect("bundled templates are valid")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let set: TemplateSet = toml::from_str(text)?;
        let hash = format!("{:x}", Sha256::digest(text.as_bytes()));
        Ok(PromptTemplates { set, hash })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn version(&self) -> &str {
        &self.set.version
    }

    /// SHA-256 of the template source, hex encoded.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn system(&self) -> &str {
        &self.set.system
    }

    pub fn set(&self) -> &TemplateSet {
        &self.set
    }
}

fn names(values: &[crate::ranking::ValueId]) -> String {
    values.iter().map(|v| v.display_name()).collect::<Vec<_>>().join(", ")
}

fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (k, v) in vars {
        out = out.replace(&format!("{{{k}}}"), v);
    }
    out.trim().to_string()
}

/// Prompt for one transcript or segment. `is_segment` adds a note that the
/// text is only part of the interview.
pub fn build_prompt(
    strategy: &PromptStrategy,
    text: &str,
    is_segment: bool,
    taxonomy: &ValueTaxonomy,
    templates: &PromptTemplates,
) -> Result<String> {
    strategy.validate(taxonomy)?;
    let t = &templates.set;
    let values = names(taxonomy.basic_values());
    let subvalues = names(taxonomy.subvalues());
    let body_template = if strategy.has(Technique::Bup) { &t.bup } else { &t.baseline };
    let body = fill(
        body_template,
        &[
            ("format", t.format.trim()),
            ("values", &values),
            ("subvalues", &subvalues),
            ("transcript", text),
        ],
    );
    let mut parts = Vec::new();
    if strategy.has(Technique::Pep) {
        let profile = strategy.profile_summary.as_deref().unwrap_or_default().trim();
        parts.push(fill(&t.pep_prefix, &[("profile", profile)]));
    }
    if strategy.has(Technique::Bc) {
        parts.push(t.bc_clause.trim().to_string());
    }
    if is_segment {
        parts.push(t.segment_note.trim().to_string());
    }
    parts.push(body);
    Ok(parts.join("\n\n") + "\n")
}

/// Prompt that merges per-segment outputs into one ranking.
pub fn build_aggregation_prompt(
    strategy: &PromptStrategy,
    segment_outputs: &[String],
    taxonomy: &ValueTaxonomy,
    templates: &PromptTemplates,
) -> Result<String> {
    if segment_outputs.is_empty() {
        return Err(Error::Empty("segment outputs"));
    }
    let t = &templates.set;
    let template = match strategy.aggregation_input {
        AggregationInput::Rankings => &t.aggregation_rankings,
        AggregationInput::Text => &t.aggregation_text,
    };
    let segments = segment_outputs
        .iter()
        .enumerate()
        .map(|(i, s)| format!("Part {}:\n{}", i + 1, s.trim()))
        .collect::<Vec<_>>()
        .join("\n\n");
    let mut parts = Vec::new();
    if strategy.has(Technique::Bc) {
        parts.push(t.bc_clause.trim().to_string());
    }
    parts.push(fill(
        template,
        &[
            ("format", t.format.trim()),
            ("values", &names(taxonomy.basic_values())),
            ("segments", &segments),
        ],
    ));
    Ok(parts.join("\n\n") + "\n")
}
