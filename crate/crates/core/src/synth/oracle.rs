//! Brute-force reference implementations. Deliberately naive: they exist to
//! audit the optimized versions, not to be fast.

use std::collections::BTreeSet;

use crate::aggregation::{mean_ranks, tie_cmp, TiePolicy};
use crate::error::{Error, Result};
use crate::metrics::AlphaConfig;
use crate::panel::{Column, PanelMatrix};
use crate::ranking::{top_k_clipped, Ranking, TopKSet, ValueId};

pub const MAX_ORACLE_KEMENY_VALUES: usize = 8;

/// Krippendorff's alpha from its pairwise definition: observed
/// disagreement averages over ordered judgment pairs within each interview
/// (weighted `1 / (m - 1)`), expected disagreement over all ordered pairs
/// of pairable judgments.
pub fn oracle_alpha(panel: &PanelMatrix, columns: &[Column], cfg: &AlphaConfig) -> Result<f64> {
    if columns.len() < 2 {
        return Err(Error::Insufficient(format!(
            "alpha needs at least 2 judges, got {}",
            columns.len()
        )));
    }
    let mut units: Vec<Vec<TopKSet>> = Vec::new();
    for interview in panel.interviews() {
        let mut judgments = Vec::new();
        for c in columns {
            if let Some(r) = panel.get(interview, c) {
                judgments.push(top_k_clipped(r, cfg.k));
            }
        }
        if judgments.len() >= 2 {
            units.push(judgments);
        }
    }
    if units.is_empty() {
        return Err(Error::Insufficient(
            "alpha needs at least one interview with two judgments".into(),
        ));
    }

    let mut n = 0.0;
    let mut observed_sum = 0.0;
    for unit in &units {
        let m = unit.len() as f64;
        n += m;
        let mut within = 0.0;
        for i in 0..unit.len() {
            for j in 0..unit.len() {
                if i != j {
                    within += cfg.distance.distance(&unit[i], &unit[j]);
                }
            }
        }
        observed_sum += within / (m - 1.0);
    }
    let d_o = observed_sum / n;

    let all: Vec<&TopKSet> = units.iter().flatten().collect();
    let mut expected_sum = 0.0;
    for a in 0..all.len() {
        for b in 0..all.len() {
            if a != b {
                expected_sum += cfg.distance.distance(all[a], all[b]);
            }
        }
    }
    let d_e = expected_sum / (n * (n - 1.0));
    if d_e == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - d_o / d_e)
}

/// Kendall disagreements of `candidate` with one voter: pairs the voter
/// orders the other way. A ranked value beats an unranked one; two unranked
/// values carry no preference.
fn disagreements(candidate: &[usize], voter: &[Option<usize>]) -> u64 {
    let mut c = 0;
    for i in 0..candidate.len() {
        for j in i + 1..candidate.len() {
            let prefers_y = match (voter[candidate[i]], voter[candidate[j]]) {
                (Some(px), Some(py)) => py < px,
                (None, Some(_)) => true,
                _ => false,
            };
            if prefers_y {
                c += 1;
            }
        }
    }
    c
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Scans all orderings of the voters' values and returns the minimum total
/// Kendall distance with its tie-policy-least minimizer.
pub fn oracle_kemeny(rankings: &[Ranking], policy: TiePolicy) -> Result<(Ranking, u64)> {
    if rankings.is_empty() {
        return Err(Error::Empty("voter list"));
    }
    let values: Vec<ValueId> = rankings
        .iter()
        .flat_map(|r| r.items().iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if values.len() > MAX_ORACLE_KEMENY_VALUES {
        return Err(Error::TooManyValues {
            n: values.len(),
            max: MAX_ORACLE_KEMENY_VALUES,
        });
    }
    let ranks = mean_ranks(rankings);
    let policy_less = |a: &[ValueId], b: &[ValueId]| {
        for (x, y) in a.iter().zip(b) {
            match tie_cmp(policy, &ranks, x, y) {
                std::cmp::Ordering::Equal => continue,
                o => return o == std::cmp::Ordering::Less,
            }
        }
        false
    };

    let positions: Vec<Vec<Option<usize>>> = rankings
        .iter()
        .map(|r| values.iter().map(|v| r.position(v)).collect())
        .collect();
    let mut perm: Vec<usize> = (0..values.len()).collect();
    let mut best: Option<(Vec<ValueId>, u64)> = None;
    loop {
        let cost: u64 = positions.iter().map(|p| disagreements(&perm, p)).sum();
        let better = match &best {
            None => true,
            Some((_, c)) if cost > *c => false,
            Some((b, c)) => {
                let candidate: Vec<ValueId> = perm.iter().map(|&i| values[i].clone()).collect();
                cost < *c || policy_less(&candidate, b)
            }
        };
        if better {
            best = Some((perm.iter().map(|&i| values[i].clone()).collect(), cost));
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let (order, cost) = best.expect("at least one permutation");
    Ok((Ranking::new(order)?, cost))
}

/// Terms `(1 - p) p^(d-1) |a[..d] ∩ b[..d]| / d` of the unnormalized RBO
/// series, each overlap recounted from scratch.
pub fn oracle_rbo_terms(a: &Ranking, b: &Ranking, p: f64, depth_limit: usize) -> Vec<f64> {
    let depth = depth_limit.min(a.len()).min(b.len());
    (1..=depth)
        .map(|d| {
            let sa: BTreeSet<&ValueId> = a.items()[..d].iter().collect();
            let sb: BTreeSet<&ValueId> = b.items()[..d].iter().collect();
            let overlap = sa.intersection(&sb).count() as f64;
            (1.0 - p) * p.powi(d as i32 - 1) * overlap / d as f64
        })
        .collect()
}

/// Unnormalized RBO series summed to `depth_limit`.
pub fn oracle_rbo_infinite(a: &Ranking, b: &Ranking, p: f64, depth_limit: usize) -> f64 {
    oracle_rbo_terms(a, b, p, depth_limit).iter().sum()
}
