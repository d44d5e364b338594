//! Leave-one-model-out ensemble evaluation.
//!
//! For every (m-1)-model subset and configuration, each interview's rankings
//! are aggregated and the result is scored against ground truth. The gain Δ
//! is the ensemble's mean score minus the mean standalone score of the
//! subset's members over the same interviews.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ground_truth::GroundTruthSet;
use super::tie::{TieEvent, TiePolicy};
use super::voting::{aggregate, Method};
use super::MetricSummary;
use crate::error::{Error, Result};
use crate::metrics::{score_against, Metric, ScoreConfig, Scores};
use crate::panel::{Column, PanelMatrix};
use crate::ranking::Ranking;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub method: Method,
    pub tie_policy: TiePolicy,
    pub score: ScoreConfig,
}

/// All `size`-element combinations of `items`, in lexicographic index order.
pub fn combinations<T: Clone>(items: &[T], size: usize) -> Vec<Vec<T>> {
    fn go<T: Clone>(items: &[T], size: usize, start: usize, cur: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i].clone());
            go(items, size, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, size, 0, &mut Vec::new(), &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterviewEnsemble {
    pub interview_id: String,
    pub ranking: Ranking,
    pub scores: Scores,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ties: Vec<TieEvent>,
}

/// One (configuration, model subset) evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Combination {
    pub config_id: String,
    pub models: Vec<String>,
    pub interviews: Vec<InterviewEnsemble>,
    /// Interviews dropped because a member had no ranking or no ground truth exists.
    pub dropped: Vec<String>,
    pub ensemble: BTreeMap<Metric, f64>,
    pub standalone: BTreeMap<Metric, f64>,
    pub delta: BTreeMap<Metric, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub ensemble_mean: f64,
    pub standalone_mean: f64,
    pub delta: MetricSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub method: Method,
    pub tie_policy: TiePolicy,
    pub k: usize,
    pub configs: Vec<String>,
    pub models: Vec<String>,
    pub combinations: Vec<Combination>,
    pub summary: BTreeMap<Metric, DeltaRow>,
    pub warnings: Vec<String>,
}

pub fn leave_one_model_out(
    panel: &PanelMatrix,
    models: &[String],
    configs: &[String],
    ground_truth: &GroundTruthSet,
    cfg: &EnsembleConfig,
) -> Result<DeltaReport> {
    if models.len() < 3 {
        return Err(Error::Insufficient(format!(
            "leave-one-model-out needs at least 3 models, got {}",
            models.len()
        )));
    }
    if configs.is_empty() {
        return Err(Error::Empty("configuration list"));
    }
    let mut warnings = Vec::new();
    if (models.len() - 1).is_multiple_of(2) {
        warnings.push(format!(
            "{} voters per ensemble is even; ties are more likely",
            models.len() - 1
        ));
    }

    let subsets = combinations(models, models.len() - 1);
    let tasks: Vec<(&String, &Vec<String>)> = configs
        .iter()
        .flat_map(|c| subsets.iter().map(move |s| (c, s)))
        .collect();

    let combos: Vec<Combination> = tasks
        .par_iter()
        .map(|(config, subset)| evaluate_subset(panel, config, subset, ground_truth, cfg))
        .collect::<Result<_>>()?;

    for c in &combos {
        if c.interviews.is_empty() {
            warnings.push(format!(
                "config `{}` models {:?}: no interview had every member's ranking",
                c.config_id, c.models
            ));
        }
    }
    let scored: Vec<&Combination> = combos.iter().filter(|c| !c.interviews.is_empty()).collect();
    if scored.is_empty() {
        return Err(Error::Insufficient(
            "no ensemble combination could be scored".into(),
        ));
    }
    let summary = Metric::ALL
        .iter()
        .map(|m| {
            let ens: Vec<f64> = scored.iter().map(|c| c.ensemble[m]).collect();
            let alone: Vec<f64> = scored.iter().map(|c| c.standalone[m]).collect();
            let delta: Vec<f64> = scored.iter().map(|c| c.delta[m]).collect();
            (
                *m,
                DeltaRow {
                    ensemble_mean: crate::metrics::mean(&ens).unwrap(),
                    standalone_mean: crate::metrics::mean(&alone).unwrap(),
                    delta: MetricSummary::of(&delta),
                },
            )
        })
        .collect();

    Ok(DeltaReport {
        method: cfg.method,
        tie_policy: cfg.tie_policy,
        k: cfg.score.k,
        configs: configs.to_vec(),
        models: models.to_vec(),
        combinations: combos,
        summary,
        warnings,
    })
}

fn evaluate_subset(
    panel: &PanelMatrix,
    config: &str,
    subset: &[String],
    ground_truth: &GroundTruthSet,
    cfg: &EnsembleConfig,
) -> Result<Combination> {
    let columns: Vec<Column> = subset.iter().map(|m| Column::model(m, config)).collect();
    let mut interviews = Vec::new();
    let mut dropped = Vec::new();
    let mut member_scores: Vec<Vec<Scores>> = vec![Vec::new(); subset.len()];

    for interview in panel.interviews() {
        let gt = ground_truth.get(interview);
        let rankings: Vec<Ranking> = columns
            .iter()
            .filter_map(|c| panel.get(interview, c).cloned())
            .collect();
        let Some(gt) = gt.filter(|_| rankings.len() == columns.len()) else {
            dropped.push(interview.clone());
            continue;
        };
        let agg = aggregate(cfg.method, &rankings, cfg.score.k, cfg.tie_policy)?;
        let scores = score_against(&agg.ranking, &gt.ranking, &cfg.score)?;
        for (i, r) in rankings.iter().enumerate() {
            member_scores[i].push(score_against(r, &gt.ranking, &cfg.score)?);
        }
        interviews.push(InterviewEnsemble {
            interview_id: interview.clone(),
            ranking: agg.ranking,
            scores,
            cost: agg.cost,
            ties: agg.ties,
        });
    }

    let mut ensemble = BTreeMap::new();
    let mut standalone = BTreeMap::new();
    let mut delta = BTreeMap::new();
    if !interviews.is_empty() {
        for m in Metric::ALL {
            let ens = crate::metrics::mean(
                &interviews.iter().map(|e| e.scores.get(m)).collect::<Vec<_>>(),
            )
            .unwrap();
            let member_means: Vec<f64> = member_scores
                .iter()
                .map(|s| crate::metrics::mean(&s.iter().map(|x| x.get(m)).collect::<Vec<_>>()).unwrap())
                .collect();
            let alone = crate::metrics::mean(&member_means).unwrap();
            ensemble.insert(m, ens);
            standalone.insert(m, alone);
            delta.insert(m, ens - alone);
        }
    }
    Ok(Combination {
        config_id: config.to_string(),
        models: subset.to_vec(),
        interviews,
        dropped,
        ensemble,
        standalone,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_of_three_out_of_four() {
        let c = combinations(&["a", "b", "c", "d"], 3);
        assert_eq!(c.len(), 4);
        assert_eq!(c[0], vec!["a", "b", "c"]);
        assert_eq!(c[3], vec!["b", "c", "d"]);
        assert_eq!(combinations(&[1, 2], 0), vec![Vec::<i32>::new()]);
    }
}
