//! Rank aggregation: top-k majority vote, Borda count and exact
//! Kemeny-Young.
//!
//! Voters may submit partial rankings. The value universe is the union of
//! everything ranked; a voter is read as preferring each ranked value over
//! each value it left out, with no preference among the values it left out.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::tie::{mean_ranks, order_by_score, resolution, tie_cmp, TieEvent, TiePolicy};
use crate::error::{Error, Result};
use crate::ranking::{top_k_clipped, Ranking, ValueId};

/// Largest universe the subset DP accepts.
pub const MAX_KEMENY_VALUES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Kemeny,
    Majority,
    Borda,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Kemeny, Method::Majority, Method::Borda];

    pub fn name(self) -> &'static str {
        match self {
            Method::Kemeny => "kemeny",
            Method::Majority => "majority",
            Method::Borda => "borda",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::Kemeny => "Kemeny-Young",
            Method::Majority => "Majority Vote",
            Method::Borda => "Borda Count",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kemeny" | "kemeny-young" => Ok(Method::Kemeny),
            "majority" | "majority-vote" => Ok(Method::Majority),
            "borda" | "borda-count" => Ok(Method::Borda),
            other => Err(Error::InvalidArgument(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub ranking: Ranking,
    pub ties: Vec<TieEvent>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    /// Total Kendall distance to the voters (Kemeny only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<u64>,
}

pub fn aggregate(
    method: Method,
    rankings: &[Ranking],
    k: usize,
    policy: TiePolicy,
) -> Result<Aggregate> {
    match method {
        Method::Kemeny => aggregate_kemeny(rankings, policy),
        Method::Majority => aggregate_majority(rankings, k, policy),
        Method::Borda => aggregate_borda(rankings, policy),
    }
}

fn single_voter_warning(rankings: &[Ranking]) -> Vec<String> {
    if rankings.len() == 1 {
        vec!["single voter: aggregate equals that voter's ranking".to_string()]
    } else {
        Vec::new()
    }
}

/// Orders values by how many voters place them in their top-k.
pub fn aggregate_majority(rankings: &[Ranking], k: usize, policy: TiePolicy) -> Result<Aggregate> {
    if rankings.is_empty() {
        return Err(Error::Empty("voter list"));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    let mut counts: BTreeMap<ValueId, f64> = BTreeMap::new();
    for r in rankings {
        for v in r.items() {
            counts.entry(v.clone()).or_insert(0.0);
        }
        for v in top_k_clipped(r, k).members() {
            *counts.get_mut(v).expect("inserted above") += 1.0;
        }
    }
    let ranks = mean_ranks(rankings);
    let (order, ties) = order_by_score(&counts, &ranks, policy);
    Ok(Aggregate {
        ranking: Ranking::new(order)?,
        ties,
        warnings: single_voter_warning(rankings),
        cost: None,
    })
}

fn universe(rankings: &[Ranking]) -> Vec<ValueId> {
    let set: BTreeSet<&ValueId> = rankings.iter().flat_map(|r| r.items()).collect();
    set.into_iter().cloned().collect()
}

/// Borda points: the value at zero-based position `i` of `n` earns
/// `n - 1 - i`; values a voter left out share the remaining points evenly.
pub fn borda_scores(rankings: &[Ranking]) -> BTreeMap<ValueId, f64> {
    let values = universe(rankings);
    let n = values.len() as i64;
    // doubled points keep half-point shares exact
    let mut doubled: BTreeMap<ValueId, i64> = values.iter().map(|v| (v.clone(), 0)).collect();
    for r in rankings {
        let len = r.len() as i64;
        for (pos, v) in r.items().iter().enumerate() {
            *doubled.get_mut(v).unwrap() += 2 * (n - 1 - pos as i64);
        }
        // unassigned positions len..n carry points n-1-len down to 0
        let leftover_share = n - 1 - len;
        for v in &values {
            if !r.contains(v) {
                *doubled.get_mut(v).unwrap() += leftover_share;
            }
        }
    }
    doubled
        .into_iter()
        .map(|(v, d)| (v, d as f64 / 2.0))
        .collect()
}

pub fn aggregate_borda(rankings: &[Ranking], policy: TiePolicy) -> Result<Aggregate> {
    if rankings.is_empty() {
        return Err(Error::Empty("voter list"));
    }
    let scores = borda_scores(rankings);
    let ranks = mean_ranks(rankings);
    let (order, ties) = order_by_score(&scores, &ranks, policy);
    Ok(Aggregate {
        ranking: Ranking::new(order)?,
        ties,
        warnings: single_voter_warning(rankings),
        cost: None,
    })
}

/// `pref[i][j]`: number of voters strictly preferring value `i` over `j`.
/// Voter items outside `values` are ignored.
pub fn preference_matrix(rankings: &[Ranking], values: &[ValueId]) -> Vec<Vec<u64>> {
    let n = values.len();
    let index: BTreeMap<&ValueId, usize> = values.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut pref = vec![vec![0u64; n]; n];
    for r in rankings {
        let mut pos = vec![usize::MAX; n];
        for (p, v) in r.items().iter().enumerate() {
            if let Some(&i) = index.get(v) {
                pos[i] = p;
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && pos[i] < pos[j] {
                    pref[i][j] += 1;
                }
            }
        }
    }
    pref
}

/// Total Kendall distance from `candidate` to the voters, counting only
/// pairs on which a voter expressed a preference.
pub fn kendall_cost(candidate: &Ranking, rankings: &[Ranking]) -> u64 {
    let values = candidate.items();
    let pref = preference_matrix(rankings, values);
    let mut cost = 0;
    for (i, row) in pref.iter().enumerate() {
        cost += row[..i].iter().sum::<u64>();
    }
    cost
}

/// Exact Kemeny-Young by dynamic programming over the set of values already
/// placed. Among co-optimal rankings the one that is least under the tie
/// policy's value order, compared position by position, is returned.
pub fn aggregate_kemeny(rankings: &[Ranking], policy: TiePolicy) -> Result<Aggregate> {
    if rankings.is_empty() {
        return Err(Error::Empty("voter list"));
    }
    let ranks = mean_ranks(rankings);
    let mut values = universe(rankings);
    let n = values.len();
    if n > MAX_KEMENY_VALUES {
        return Err(Error::TooManyValues {
            n,
            max: MAX_KEMENY_VALUES,
        });
    }
    // Index values in tie-policy order so the greedy reconstruction below
    // picks the policy-least co-optimal ranking.
    values.sort_by(|a, b| tie_cmp(policy, &ranks, a, b));
    let pref = preference_matrix(rankings, &values);

    let full: usize = (1 << n) - 1;
    // placing x directly after `placed` violates every voter preferring some
    // not-yet-placed y over x
    let step_cost = |placed: usize, x: usize| -> u64 {
        let mut rest = full & !placed & !(1 << x);
        let mut c = 0;
        while rest != 0 {
            let y = rest.trailing_zeros() as usize;
            c += pref[y][x];
            rest &= rest - 1;
        }
        c
    };

    // best[s]: minimum cost of ordering the values not in s, given s placed first
    let mut best = vec![u64::MAX; 1 << n];
    best[full] = 0;
    for placed in (0..full).rev() {
        let mut free = full & !placed;
        let mut m = u64::MAX;
        while free != 0 {
            let x = free.trailing_zeros() as usize;
            free &= free - 1;
            let c = step_cost(placed, x) + best[placed | (1 << x)];
            m = m.min(c);
        }
        best[placed] = m;
    }

    let mut order = Vec::with_capacity(n);
    let mut ties = Vec::new();
    let mut placed = 0usize;
    while placed != full {
        let optimal: Vec<usize> = (0..n)
            .filter(|&x| placed & (1 << x) == 0)
            .filter(|&x| step_cost(placed, x) + best[placed | (1 << x)] == best[placed])
            .collect();
        let x = optimal[0];
        if optimal.len() > 1 {
            let group: Vec<ValueId> = optimal.iter().map(|&i| values[i].clone()).collect();
            ties.push(TieEvent {
                position: order.len(),
                resolved_by: resolution(policy, &ranks, &group),
                values: group,
                score: best[placed] as f64,
            });
        }
        order.push(values[x].clone());
        placed |= 1 << x;
    }

    Ok(Aggregate {
        ranking: Ranking::new(order)?,
        ties,
        warnings: single_voter_warning(rankings),
        cost: Some(best[0]),
    })
}
