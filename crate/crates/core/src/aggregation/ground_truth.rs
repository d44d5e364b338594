//! Majority-vote ground truth and the leave-one-annotator-out human ceiling.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::tie::{mean_ranks, order_by_score, TieEvent, TiePolicy};
use super::MetricSummary;
use crate::error::{Error, Result};
use crate::metrics::{score_against, Metric, ScoreConfig, Scores};
use crate::panel::{Column, PanelMatrix};
use crate::ranking::{top_k_clipped, Ranking, TopKSet, ValueId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub interview_id: String,
    /// Top-k values ordered by vote count, then tie policy.
    pub ranking: Ranking,
    pub top: TopKSet,
    /// Number of contributing judges whose top-k contains each value.
    pub support: BTreeMap<ValueId, usize>,
    pub judges: usize,
    /// Tie groups straddling the k-th slot, i.e. deciding membership.
    pub ties: Vec<TieEvent>,
    /// Tie groups inside the top-k that only decided the order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub order_ties: Vec<TieEvent>,
    /// False when some listed judge had no annotation for this interview.
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct GroundTruthSet {
    pub k: usize,
    pub tie_policy: TiePolicy,
    pub truths: Vec<GroundTruth>,
    /// Interviews where at least one listed judge was missing.
    pub incomplete: Vec<String>,
    /// Interviews skipped for having fewer than two judgments.
    pub skipped: Vec<String>,
}

impl GroundTruthSet {
    pub fn get(&self, interview_id: &str) -> Option<&GroundTruth> {
        self.truths.iter().find(|t| t.interview_id == interview_id)
    }
}

/// Majority vote over one interview's judgments: each value scores the number
/// of judges whose top-k contains it.
pub fn vote_top_k(
    interview_id: &str,
    rankings: &[Ranking],
    k: usize,
    policy: TiePolicy,
) -> Result<GroundTruth> {
    if rankings.len() < 2 {
        return Err(Error::Insufficient(format!(
            "ground truth for `{interview_id}` needs at least 2 judges, got {}",
            rankings.len()
        )));
    }
    let mut support: BTreeMap<ValueId, usize> = BTreeMap::new();
    for r in rankings {
        for v in top_k_clipped(r, k).members() {
            *support.entry(v.clone()).or_default() += 1;
        }
    }
    if support.values().all(|&c| c == 0) {
        return Err(Error::Insufficient(format!(
            "no votes for `{interview_id}`"
        )));
    }
    let scores: BTreeMap<ValueId, f64> =
        support.iter().map(|(v, c)| (v.clone(), *c as f64)).collect();
    let ranks = mean_ranks(rankings);
    let (order, ties) = order_by_score(&scores, &ranks, policy);
    let take = k.min(order.len());
    let top_order: Vec<ValueId> = order[..take].to_vec();
    let (ties, order_ties): (Vec<TieEvent>, Vec<TieEvent>) = ties
        .into_iter()
        .filter(|t| t.position < take)
        .partition(|t| t.position + t.values.len() > take);
    Ok(GroundTruth {
        interview_id: interview_id.to_string(),
        top: TopKSet::from_members(top_order.iter().cloned()),
        ranking: Ranking::new(top_order)?,
        support,
        judges: rankings.len(),
        ties,
        order_ties,
        complete: true,
    })
}

pub fn build_ground_truth(
    panel: &PanelMatrix,
    judges: &[Column],
    k: usize,
    policy: TiePolicy,
) -> Result<GroundTruthSet> {
    if judges.len() < 2 {
        return Err(Error::Insufficient(format!(
            "ground truth needs at least 2 judges, got {}",
            judges.len()
        )));
    }
    let mut out = GroundTruthSet {
        k,
        tie_policy: policy,
        ..Default::default()
    };
    for interview in panel.interviews() {
        let rankings: Vec<Ranking> = judges
            .iter()
            .filter_map(|c| panel.get(interview, c).cloned())
            .collect();
        let complete = rankings.len() == judges.len();
        if !complete {
            out.incomplete.push(interview.clone());
        }
        if rankings.len() < 2 {
            out.skipped.push(interview.clone());
            continue;
        }
        let mut gt = vote_top_k(interview, &rankings, k, policy)?;
        gt.complete = complete;
        out.truths.push(gt);
    }
    if out.truths.is_empty() {
        return Err(Error::Insufficient(
            "no interview has two or more judgments".into(),
        ));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Completeness {
    /// Missing cells are an error.
    #[default]
    Strict,
    /// Missing cells are skipped and listed.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeCeiling {
    pub judge_id: String,
    pub interviews: usize,
    pub mean: BTreeMap<Metric, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CeilingReport {
    pub k: usize,
    pub tie_policy: TiePolicy,
    pub per_judge: Vec<JudgeCeiling>,
    /// Mean and population std pooled over every (judge, interview) score.
    pub overall: BTreeMap<Metric, MetricSummary>,
    pub pooled: usize,
    /// Per (judge, interview) scores, judge-major.
    pub scores: Vec<(String, String, Scores)>,
    pub warnings: Vec<String>,
}

/// Scores each judge against the majority vote of the remaining judges.
pub fn human_ceiling(
    panel: &PanelMatrix,
    judges: &[String],
    cfg: &ScoreConfig,
    policy: TiePolicy,
    completeness: Completeness,
) -> Result<CeilingReport> {
    if judges.len() < 3 {
        return Err(Error::Insufficient(format!(
            "human ceiling needs at least 3 judges, got {}",
            judges.len()
        )));
    }
    let columns: Vec<Column> = judges.iter().map(Column::expert).collect();
    let missing = panel.missing(&columns);
    let mut warnings = Vec::new();
    if !missing.is_empty() {
        let listing: Vec<String> = missing.iter().map(|(i, c)| format!("({i}, {c})")).collect();
        match completeness {
            Completeness::Strict => {
                return Err(Error::Panel(format!(
                    "incomplete expert panel: {}",
                    listing.join(", ")
                )))
            }
            Completeness::Lenient => warnings.push(format!(
                "skipped missing cells: {}",
                listing.join(", ")
            )),
        }
    }

    let mut per_judge = Vec::new();
    let mut scores = Vec::new();
    for (idx, judge) in judges.iter().enumerate() {
        let rest: Vec<Column> = columns
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != idx)
            .map(|(_, c)| c.clone())
            .collect();
        let truth = build_ground_truth(panel, &rest, cfg.k, policy)?;
        let mut own = Vec::new();
        for gt in &truth.truths {
            let Some(ranking) = panel.get(&gt.interview_id, &columns[idx]) else {
                continue;
            };
            let s = score_against(ranking, &gt.ranking, cfg)?;
            if s.clipped {
                warnings.push(format!(
                    "({}, {judge}): depth clipped below k={}",
                    gt.interview_id, cfg.k
                ));
            }
            own.push(s);
            scores.push((judge.clone(), gt.interview_id.clone(), s));
        }
        per_judge.push(JudgeCeiling {
            judge_id: judge.clone(),
            interviews: own.len(),
            mean: Metric::ALL
                .iter()
                .map(|m| {
                    let xs: Vec<f64> = own.iter().map(|s| s.get(*m)).collect();
                    (*m, crate::metrics::mean(&xs).unwrap_or(f64::NAN))
                })
                .collect(),
        });
    }
    let overall = Metric::ALL
        .iter()
        .map(|m| {
            let xs: Vec<f64> = scores.iter().map(|(_, _, s)| s.get(*m)).collect();
            (*m, MetricSummary::of(&xs))
        })
        .collect();
    Ok(CeilingReport {
        k: cfg.k,
        tie_policy: policy,
        per_judge,
        overall,
        pooled: scores.len(),
        scores,
        warnings,
    })
}
