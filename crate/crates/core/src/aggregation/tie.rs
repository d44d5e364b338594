use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranking::{Ranking, ValueId};

/// Order applied among values with equal aggregate score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TiePolicy {
    /// Better (lower) mean rank among the voters that ranked the value,
    /// then identifier order.
    #[default]
    MeanRankThenLexicographic,
    /// Identifier order only.
    Lexicographic,
}

impl TiePolicy {
    pub fn name(self) -> &'static str {
        match self {
            TiePolicy::MeanRankThenLexicographic => "mean-rank-then-lexicographic",
            TiePolicy::Lexicographic => "lexicographic",
        }
    }
}

impl std::str::FromStr for TiePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean-rank-then-lexicographic" | "mean-rank" => Ok(TiePolicy::MeanRankThenLexicographic),
            "lexicographic" | "lex" => Ok(TiePolicy::Lexicographic),
            other => Err(Error::InvalidArgument(format!("unknown tie policy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    MeanRank,
    Lexicographic,
    MeanRankThenLexicographic,
}

/// A group of values that the primary criterion could not separate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TieEvent {
    /// Zero-based output position of the first tied slot.
    pub position: usize,
    /// Tied values, in the order the tie-break put them.
    pub values: Vec<ValueId>,
    /// The shared primary score (vote count, Borda points or Kemeny cost).
    pub score: f64,
    pub resolved_by: TieBreak,
}

/// Mean one-based position of each value over the rankings that contain it.
pub fn mean_ranks(rankings: &[Ranking]) -> BTreeMap<ValueId, f64> {
    let mut acc: BTreeMap<ValueId, (usize, usize)> = BTreeMap::new();
    for r in rankings {
        for (pos, v) in r.items().iter().enumerate() {
            let e = acc.entry(v.clone()).or_default();
            e.0 += pos + 1;
            e.1 += 1;
        }
    }
    acc.into_iter()
        .map(|(v, (sum, n))| (v, sum as f64 / n as f64))
        .collect()
}

/// Tie-break comparison between two values under `policy`.
pub fn tie_cmp(
    policy: TiePolicy,
    mean_rank: &BTreeMap<ValueId, f64>,
    a: &ValueId,
    b: &ValueId,
) -> Ordering {
    let by_rank = match policy {
        TiePolicy::MeanRankThenLexicographic => {
            let ra = mean_rank.get(a).copied().unwrap_or(f64::INFINITY);
            let rb = mean_rank.get(b).copied().unwrap_or(f64::INFINITY);
            ra.total_cmp(&rb)
        }
        TiePolicy::Lexicographic => Ordering::Equal,
    };
    by_rank.then_with(|| a.cmp(b))
}

/// Which criterion actually separated the members of a tie group.
pub fn resolution(
    policy: TiePolicy,
    mean_rank: &BTreeMap<ValueId, f64>,
    group: &[ValueId],
) -> TieBreak {
    match policy {
        TiePolicy::Lexicographic => TieBreak::Lexicographic,
        TiePolicy::MeanRankThenLexicographic => {
            let mut ranks: Vec<f64> = group
                .iter()
                .map(|v| mean_rank.get(v).copied().unwrap_or(f64::INFINITY))
                .collect();
            ranks.sort_by(f64::total_cmp);
            if ranks.windows(2).all(|w| w[0] != w[1]) {
                TieBreak::MeanRank
            } else {
                TieBreak::MeanRankThenLexicographic
            }
        }
    }
}

/// Orders values by descending score, breaking equal scores by `policy`.
/// Every group of two or more equal scores is reported as a tie event.
pub fn order_by_score(
    scores: &BTreeMap<ValueId, f64>,
    mean_rank: &BTreeMap<ValueId, f64>,
    policy: TiePolicy,
) -> (Vec<ValueId>, Vec<TieEvent>) {
    let mut order: Vec<ValueId> = scores.keys().cloned().collect();
    order.sort_by(|a, b| {
        scores[b]
            .total_cmp(&scores[a])
            .then_with(|| tie_cmp(policy, mean_rank, a, b))
    });

    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[&order[j]] == scores[&order[i]] {
            j += 1;
        }
        if j - i > 1 {
            let group = order[i..j].to_vec();
            ties.push(TieEvent {
                position: i,
                resolved_by: resolution(policy, mean_rank, &group),
                values: group,
                score: scores[&order[i]],
            });
        }
        i = j;
    }
    (order, ties)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> ValueId {
        ValueId::new(s)
    }

    #[test]
    fn groups_of_equal_scores_are_logged() {
        let scores: BTreeMap<ValueId, f64> =
            [("a", 3.0), ("b", 2.0), ("c", 2.0), ("d", 1.0)].iter().map(|(k, s)| (v(k), *s)).collect();
        let ranks: BTreeMap<ValueId, f64> =
            [("a", 1.0), ("b", 2.5), ("c", 2.0), ("d", 3.0)].iter().map(|(k, s)| (v(k), *s)).collect();
        let (order, ties) = order_by_score(&scores, &ranks, TiePolicy::default());
        assert_eq!(order, vec![v("a"), v("c"), v("b"), v("d")]);
        assert_eq!(ties.len(), 1);
        assert_eq!(ties[0].position, 1);
        assert_eq!(ties[0].resolved_by, TieBreak::MeanRank);

        let (order, ties) = order_by_score(&scores, &ranks, TiePolicy::Lexicographic);
        assert_eq!(order, vec![v("a"), v("b"), v("c"), v("d")]);
        assert_eq!(ties[0].resolved_by, TieBreak::Lexicographic);
    }

    #[test]
    fn mean_rank_over_rankers_only() {
        let r1 = Ranking::from_names(&["a", "b"]).unwrap();
        let r2 = Ranking::from_names(&["b", "c", "a"]).unwrap();
        let m = mean_ranks(&[r1, r2]);
        assert_eq!(m[&v("a")], 2.0);
        assert_eq!(m[&v("b")], 1.5);
        assert_eq!(m[&v("c")], 2.0);
    }

    #[test]
    fn policy_round_trips_through_str() {
        for p in [TiePolicy::MeanRankThenLexicographic, TiePolicy::Lexicographic] {
            assert_eq!(p.name().parse::<TiePolicy>().unwrap(), p);
        }
    }
}
