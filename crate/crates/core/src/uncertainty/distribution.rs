use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{cosine, population_std, spearman_rho, Correlation, ScoreVector};
use crate::panel::{Column, JudgeKind, PanelMatrix};
use crate::ranking::{top_k_clipped, Ranking};
use crate::taxonomy::ValueTaxonomy;

/// A group of judgments treated as one source of opinions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "id")]
pub enum Source {
    /// All expert columns.
    Experts,
    /// One model across its prompt configurations.
    Model(String),
}

impl Source {
    pub fn label(&self) -> String {
        match self {
            Source::Experts => "Experts".to_string(),
            Source::Model(m) => m.clone(),
        }
    }

    /// Panel columns that make up this source.
    pub fn columns(&self, panel: &PanelMatrix) -> Vec<Column> {
        match self {
            Source::Experts => panel.expert_columns(),
            Source::Model(m) => panel
                .configs_of(m)
                .into_iter()
                .map(|c| Column::model(m.clone(), c))
                .collect(),
        }
    }

    /// The expert source followed by every model judge, sorted.
    pub fn all(panel: &PanelMatrix) -> Vec<Source> {
        let mut out = Vec::new();
        if !panel.judges_of_kind(JudgeKind::Expert).is_empty() {
            out.push(Source::Experts);
        }
        out.extend(panel.judges_of_kind(JudgeKind::Model).into_iter().map(Source::Model));
        out
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// How a judgment turns into per-value assignments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    /// 1 for each top-k member, 0 otherwise.
    #[default]
    Binary,
    /// k, k-1, ..., 1 down the top-k (3/2/1 for k = 3).
    RankWeighted,
}

/// Assignment vector of one ranking over the taxonomy's basic values.
pub fn indicator(
    ranking: &Ranking,
    taxonomy: &ValueTaxonomy,
    k: usize,
    weighting: Weighting,
) -> Result<ScoreVector> {
    let mut out = ScoreVector::zeros(taxonomy.basic_values().len());
    let top = top_k_clipped(ranking, k);
    for (pos, v) in ranking.items().iter().enumerate() {
        if !top.contains(v) {
            continue;
        }
        let idx = taxonomy
            .index_of(v)
            .ok_or_else(|| Error::UnknownValue(v.to_string()))?;
        out.0[idx] = match weighting {
            Weighting::Binary => 1.0,
            Weighting::RankWeighted => (k - pos) as f64,
        };
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueDistribution {
    pub interview_id: String,
    pub source: Source,
    pub judgments: usize,
    pub mean: ScoreVector,
    /// Population standard deviation per value.
    pub std: ScoreVector,
}

pub fn value_distribution(
    panel: &PanelMatrix,
    interview_id: &str,
    source: &Source,
    taxonomy: &ValueTaxonomy,
    k: usize,
    weighting: Weighting,
) -> Result<ValueDistribution> {
    let vectors: Vec<ScoreVector> = source
        .columns(panel)
        .iter()
        .filter_map(|c| panel.get(interview_id, c))
        .map(|r| indicator(r, taxonomy, k, weighting))
        .collect::<Result<_>>()?;
    if vectors.len() < 2 {
        return Err(Error::Insufficient(format!(
            "{source} has {} judgment(s) for `{interview_id}`, need at least 2",
            vectors.len()
        )));
    }
    let dims = taxonomy.basic_values().len();
    let mut mean = Vec::with_capacity(dims);
    let mut std = Vec::with_capacity(dims);
    for d in 0..dims {
        let column: Vec<f64> = vectors.iter().map(|v| v[d]).collect();
        mean.push(crate::metrics::mean(&column).unwrap());
        std.push(population_std(&column).unwrap());
    }
    Ok(ValueDistribution {
        interview_id: interview_id.to_string(),
        source: source.clone(),
        judgments: vectors.len(),
        mean: ScoreVector::new(mean),
        std: ScoreVector::new(std),
    })
}

fn same_interview(a: &ValueDistribution, b: &ValueDistribution) -> Result<()> {
    if a.interview_id != b.interview_id {
        return Err(Error::InvalidArgument(format!(
            "distributions belong to different interviews: `{}` vs `{}`",
            a.interview_id, b.interview_id
        )));
    }
    Ok(())
}

/// Cosine between the per-value means of a model and the experts.
pub fn alignment_cosine(model: &ValueDistribution, experts: &ValueDistribution) -> Result<f64> {
    same_interview(model, experts)?;
    cosine(&model.mean, &experts.mean)
}

/// Spearman's rho between the per-value standard deviations.
pub fn alignment_spearman(
    model: &ValueDistribution,
    experts: &ValueDistribution,
) -> Result<Correlation> {
    same_interview(model, experts)?;
    spearman_rho(&model.std, &experts.std)
}

/// Median of the per-value standard deviations (mean of the two middle
/// entries for an even count).
pub fn median_per_value_std(dist: &ValueDistribution) -> f64 {
    median(dist.std.as_slice())
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::AnnotationRecord;
    use crate::taxonomy::LoadMode;

    fn toy() -> ValueTaxonomy {
        ValueTaxonomy::from_toml(
            r#"basic_values = ["a", "b", "c", "d", "e"]"#,
            LoadMode::Permissive,
        )
        .unwrap()
    }

    fn model_panel(rows: &[(&str, &str, &str)]) -> PanelMatrix {
        PanelMatrix::from_records(rows.iter().map(|(i, cfg, r)| AnnotationRecord {
            interview_id: i.to_string(),
            judge_id: "m".into(),
            judge_kind: JudgeKind::Model,
            config_id: Some(cfg.to_string()),
            ranking: Ranking::from_names(&r.chars().map(|c| c.to_string()).collect::<Vec<_>>())
                .unwrap(),
        }))
        .unwrap()
    }

    #[test]
    fn identical_prompts_have_zero_std() {
        let p = model_panel(&[("i", "p1", "abce"), ("i", "p2", "abcd"), ("i", "p3", "bacd")]);
        let d = value_distribution(&p, "i", &Source::Model("m".into()), &toy(), 3, Weighting::Binary)
            .unwrap();
        assert_eq!(d.mean.as_slice(), &[1.0, 1.0, 1.0, 0.0, 0.0]);
        assert_eq!(d.std.as_slice(), &[0.0; 5]);
    }

    #[test]
    fn two_prompts_split_on_one_value() {
        let p = model_panel(&[("i", "p1", "abc"), ("i", "p2", "abd")]);
        let d = value_distribution(&p, "i", &Source::Model("m".into()), &toy(), 3, Weighting::Binary)
            .unwrap();
        assert_eq!(d.mean.as_slice(), &[1.0, 1.0, 0.5, 0.5, 0.0]);
        assert_eq!(d.std.as_slice(), &[0.0, 0.0, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn one_prompt_is_not_enough() {
        let p = model_panel(&[("i", "p1", "abc")]);
        assert!(
            value_distribution(&p, "i", &Source::Model("m".into()), &toy(), 3, Weighting::Binary)
                .is_err()
        );
    }

    #[test]
    fn rank_weighting() {
        let r = Ranking::from_names(&["c", "a", "e", "b"]).unwrap();
        let v = indicator(&r, &toy(), 3, Weighting::RankWeighted).unwrap();
        assert_eq!(v.as_slice(), &[2.0, 0.0, 3.0, 0.0, 1.0]);
    }

    #[test]
    fn median_examples() {
        assert_eq!(median(&[0.0; 10]), 0.0);
        assert_eq!(median(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.5, 0.5, 0.5, 0.5]), 0.25);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    }

    #[test]
    fn alignment_requires_same_interview() {
        let p = model_panel(&[
            ("i", "p1", "abc"),
            ("i", "p2", "abd"),
            ("j", "p1", "abc"),
            ("j", "p2", "abd"),
        ]);
        let s = Source::Model("m".into());
        let di = value_distribution(&p, "i", &s, &toy(), 3, Weighting::Binary).unwrap();
        let dj = value_distribution(&p, "j", &s, &toy(), 3, Weighting::Binary).unwrap();
        assert!(alignment_cosine(&di, &dj).is_err());
        assert!((alignment_cosine(&di, &di).unwrap() - 1.0).abs() < 1e-12);
        let scaled = ValueDistribution {
            mean: di.mean.scaled(3.5),
            ..di.clone()
        };
        assert!((alignment_cosine(&scaled, &di).unwrap() - 1.0).abs() < 1e-12);
    }
}
