//! Model scores against expert ground truth, per configuration, per model
//! and per prompt.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::aggregation::{GroundTruthSet, MetricSummary};
use crate::error::{Error, Result};
use crate::metrics::{krippendorff_alpha, score_against, AlphaConfig, Metric, ScoreConfig};
use crate::panel::{Column, JudgeKind, PanelMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigScore {
    pub model: String,
    pub config: String,
    pub interviews: usize,
    /// Interviews with ground truth but no judgment in this column.
    pub missing: Vec<String>,
    pub mean: BTreeMap<Metric, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRow {
    pub model: String,
    pub configs: usize,
    /// Mean and spread across configurations of the per-configuration means.
    pub scores: BTreeMap<Metric, MetricSummary>,
    /// Agreement of the model with itself across configurations.
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptRow {
    pub config: String,
    pub models: usize,
    /// Mean and spread across models of the per-configuration means.
    pub scores: BTreeMap<Metric, MetricSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub k: usize,
    pub interviews: usize,
    pub per_config: Vec<ConfigScore>,
    pub per_model: Vec<ModelRow>,
    pub per_prompt: Vec<PromptRow>,
    pub warnings: Vec<String>,
}

fn summarize(rows: &[&ConfigScore]) -> BTreeMap<Metric, MetricSummary> {
    Metric::ALL
        .iter()
        .map(|&m| {
            let xs: Vec<f64> = rows.iter().map(|r| r.mean[&m]).collect();
            (m, MetricSummary::of(&xs))
        })
        .collect()
}

/// Scores every model column against the ground truth. Each configuration
/// is first averaged over interviews; models and prompts then summarize
/// those averages.
pub fn evaluate(
    panel: &PanelMatrix,
    truth: &GroundTruthSet,
    score: &ScoreConfig,
    alpha: &AlphaConfig,
) -> Result<EvaluationReport> {
    let models = panel.judges_of_kind(JudgeKind::Model);
    if models.is_empty() {
        return Err(Error::Empty("model judgments"));
    }
    if truth.truths.is_empty() {
        return Err(Error::Empty("ground truth"));
    }
    let mut warnings = Vec::new();
    let mut per_config = Vec::new();
    for model in &models {
        for config in panel.configs_of(model) {
            let col = Column::model(model.clone(), config.clone());
            let mut sums: BTreeMap<Metric, Vec<f64>> = BTreeMap::new();
            let mut missing = Vec::new();
            for gt in &truth.truths {
                let Some(r) = panel.get(&gt.interview_id, &col) else {
                    missing.push(gt.interview_id.clone());
                    continue;
                };
                let s = score_against(r, &gt.ranking, score)?;
                for m in Metric::ALL {
                    sums.entry(m).or_default().push(s.get(m));
                }
            }
            if !missing.is_empty() {
                warnings.push(format!("{col}: no judgment for {} interview(s)", missing.len()));
            }
            if sums.is_empty() {
                warnings.push(format!("{col}: nothing to score, column skipped"));
                continue;
            }
            per_config.push(ConfigScore {
                model: model.clone(),
                config,
                interviews: sums[&Metric::F1].len(),
                missing,
                mean: sums
                    .iter()
                    .map(|(m, xs)| (*m, crate::metrics::mean(xs).unwrap()))
                    .collect(),
            });
        }
    }

    let mut per_model = Vec::new();
    for model in &models {
        let rows: Vec<&ConfigScore> = per_config.iter().filter(|r| &r.model == model).collect();
        if rows.is_empty() {
            continue;
        }
        let cols: Vec<Column> = rows
            .iter()
            .map(|r| Column::model(model.clone(), r.config.clone()))
            .collect();
        let (a, note) = match krippendorff_alpha(panel, &cols, alpha) {
            Ok(o) => (Some(o.alpha), o.warnings.first().cloned()),
            Err(e) => (None, Some(e.to_string())),
        };
        per_model.push(ModelRow {
            model: model.clone(),
            configs: rows.len(),
            scores: summarize(&rows),
            alpha: a,
            alpha_note: note,
        });
    }

    let mut configs: Vec<String> = per_config.iter().map(|r| r.config.clone()).collect();
    configs.sort();
    configs.dedup();
    let per_prompt = configs
        .into_iter()
        .map(|config| {
            let rows: Vec<&ConfigScore> = per_config.iter().filter(|r| r.config == config).collect();
            PromptRow {
                models: rows.len(),
                scores: summarize(&rows),
                config,
            }
        })
        .collect();

    Ok(EvaluationReport {
        k: score.k,
        interviews: truth.truths.len(),
        per_config,
        per_model,
        per_prompt,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::{build_ground_truth, TiePolicy};
    use crate::panel::AnnotationRecord;
    use crate::ranking::Ranking;

    fn rec(i: &str, j: &str, cfg: Option<&str>, s: &str) -> AnnotationRecord {
        AnnotationRecord {
            interview_id: i.into(),
            judge_id: j.into(),
            judge_kind: if cfg.is_some() { JudgeKind::Model } else { JudgeKind::Expert },
            config_id: cfg.map(str::to_string),
            ranking: Ranking::from_names(&s.chars().map(|c| c.to_string()).collect::<Vec<_>>())
                .unwrap(),
        }
    }

    #[test]
    fn hand_computed_tables() {
        let mut recs = vec![];
        for i in ["u1", "u2"] {
            for e in ["e1", "e2", "e3"] {
                recs.push(rec(i, e, None, "abcdef"));
            }
        }
        // m: config x perfect on both, config y one miss on u1
        recs.push(rec("u1", "m", Some("x"), "abcdef"));
        recs.push(rec("u2", "m", Some("x"), "abcdef"));
        recs.push(rec("u1", "m", Some("y"), "abdcef"));
        recs.push(rec("u2", "m", Some("y"), "abcdef"));
        let p = PanelMatrix::from_records(recs).unwrap();
        let gt = build_ground_truth(&p, &p.expert_columns(), 3, TiePolicy::default()).unwrap();
        let r = evaluate(&p, &gt, &ScoreConfig::default(), &AlphaConfig::default()).unwrap();
        assert_eq!(r.per_config.len(), 2);
        let y = &r.per_config[1];
        // u1: F1 2/3, J 2/4; u2 perfect
        assert!((y.mean[&Metric::F1] - (2.0 / 3.0 + 1.0) / 2.0).abs() < 1e-12);
        assert!((y.mean[&Metric::Jaccard] - 0.75).abs() < 1e-12);
        let m = &r.per_model[0];
        let f1 = m.scores[&Metric::F1];
        assert!((f1.mean - (1.0 + 5.0 / 6.0) / 2.0).abs() < 1e-12);
        assert!((f1.std - 1.0 / 12.0).abs() < 1e-12);
        assert_eq!(r.per_prompt.len(), 2);
        assert_eq!(r.per_prompt[0].scores[&Metric::F1].mean, 1.0);
        assert!(m.alpha.is_some());
    }

    #[test]
    fn no_models_is_an_error() {
        let p = PanelMatrix::from_records(vec![
            rec("u", "e1", None, "abc"),
            rec("u", "e2", None, "abc"),
        ])
        .unwrap();
        let gt = build_ground_truth(&p, &p.expert_columns(), 3, TiePolicy::default()).unwrap();
        assert!(evaluate(&p, &gt, &ScoreConfig::default(), &AlphaConfig::default()).is_err());
    }
}
