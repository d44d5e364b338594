//! Krippendorff's alpha over set-valued judgments.
//!
//! Each interview is a unit; each panel column that annotated it contributes
//! one judgment, its top-k set. Alpha is computed through the coincidence
//! matrix of distinct judgments, which for any distance δ equals the
//! pairwise-disagreement form `1 - D_o / D_e`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{Column, PanelMatrix};
use crate::ranking::{top_k_clipped, TopKSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetDistance {
    /// `1 - |a∩b| / |a∪b|`
    #[default]
    Jaccard,
    /// `1 - J·M`, M the MASI monotonicity weight.
    Masi,
    /// 0 if the sets are equal, else 1.
    Nominal,
}

impl SetDistance {
    pub fn distance(self, a: &TopKSet, b: &TopKSet) -> f64 {
        let inter = a.intersection_len(b);
        let union = a.union_len(b);
        if union == 0 {
            return 0.0;
        }
        let equal = inter == a.len() && inter == b.len();
        match self {
            SetDistance::Nominal => {
                if equal {
                    0.0
                } else {
                    1.0
                }
            }
            SetDistance::Jaccard => 1.0 - inter as f64 / union as f64,
            SetDistance::Masi => {
                let m = if equal {
                    1.0
                } else if inter == a.len() || inter == b.len() {
                    2.0 / 3.0
                } else if inter > 0 {
                    1.0 / 3.0
                } else {
                    0.0
                };
                1.0 - (inter as f64 / union as f64) * m
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SetDistance::Jaccard => "jaccard",
            SetDistance::Masi => "masi",
            SetDistance::Nominal => "nominal",
        }
    }
}

impl std::str::FromStr for SetDistance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jaccard" | "set_jaccard" | "set-jaccard" => Ok(SetDistance::Jaccard),
            "masi" => Ok(SetDistance::Masi),
            "nominal" => Ok(SetDistance::Nominal),
            other => Err(Error::InvalidArgument(format!("unknown distance `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaConfig {
    pub distance: SetDistance,
    /// Depth of the top-k set that forms one judgment.
    pub k: usize,
}

impl Default for AlphaConfig {
    fn default() -> Self {
        AlphaConfig {
            distance: SetDistance::Jaccard,
            k: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaOutcome {
    pub alpha: f64,
    pub observed_disagreement: f64,
    pub expected_disagreement: f64,
    /// Judgments in units with at least two judgments.
    pub pairable: usize,
    pub units: usize,
    pub warnings: Vec<String>,
}

/// Per-unit top-k judgments for the chosen columns; units with fewer than
/// two judgments are dropped.
pub fn pairable_units(
    panel: &PanelMatrix,
    columns: &[Column],
    k: usize,
) -> Vec<(String, Vec<TopKSet>)> {
    panel
        .interviews()
        .iter()
        .filter_map(|i| {
            let sets: Vec<TopKSet> = columns
                .iter()
                .filter_map(|c| panel.get(i, c))
                .map(|r| top_k_clipped(r, k))
                .collect();
            (sets.len() >= 2).then(|| (i.clone(), sets))
        })
        .collect()
}

pub fn krippendorff_alpha(
    panel: &PanelMatrix,
    columns: &[Column],
    cfg: &AlphaConfig,
) -> Result<AlphaOutcome> {
    if columns.len() < 2 {
        return Err(Error::Insufficient(format!(
            "alpha needs at least 2 judges, got {}",
            columns.len()
        )));
    }
    let units = pairable_units(panel, columns, cfg.k);
    alpha_from_units(&units, cfg.distance)
}

pub(crate) fn alpha_from_units(
    units: &[(String, Vec<TopKSet>)],
    distance: SetDistance,
) -> Result<AlphaOutcome> {
    if units.is_empty() {
        return Err(Error::Insufficient(
            "alpha needs at least one interview with two judgments".into(),
        ));
    }

    // Index distinct judgments.
    let mut index: BTreeMap<&TopKSet, usize> = BTreeMap::new();
    for (_, sets) in units {
        for s in sets {
            let next = index.len();
            index.entry(s).or_insert(next);
        }
    }
    let values: Vec<&TopKSet> = {
        let mut v = vec![None; index.len()];
        for (s, i) in &index {
            v[*i] = Some(*s);
        }
        v.into_iter().map(Option::unwrap).collect()
    };
    let c = values.len();

    let mut coincidence = vec![0.0f64; c * c];
    for (_, sets) in units {
        let mut counts = vec![0usize; c];
        for s in sets {
            counts[index[s]] += 1;
        }
        let m = sets.len() as f64;
        let present: Vec<usize> = (0..c).filter(|&i| counts[i] > 0).collect();
        for &x in &present {
            for &y in &present {
                let pairs = if x == y {
                    counts[x] * (counts[x] - 1)
                } else {
                    counts[x] * counts[y]
                };
                coincidence[x * c + y] += pairs as f64 / (m - 1.0);
            }
        }
    }

    let marginals: Vec<f64> = (0..c)
        .map(|x| (0..c).map(|y| coincidence[x * c + y]).sum())
        .collect();
    let n: f64 = marginals.iter().sum();

    let mut observed = 0.0;
    let mut expected = 0.0;
    for x in 0..c {
        for y in 0..c {
            if x == y {
                continue;
            }
            let d = distance.distance(values[x], values[y]);
            observed += coincidence[x * c + y] * d;
            expected += marginals[x] * marginals[y] * d;
        }
    }
    let observed = observed / n;
    let expected = expected / (n * (n - 1.0));

    let pairable = units.iter().map(|(_, s)| s.len()).sum();
    let mut warnings = Vec::new();
    let alpha = if expected == 0.0 {
        warnings.push(
            "expected disagreement is zero (all judgments identical corpus-wide); alpha set to 1"
                .to_string(),
        );
        1.0
    } else {
        1.0 - observed / expected
    };
    Ok(AlphaOutcome {
        alpha,
        observed_disagreement: observed,
        expected_disagreement: expected,
        pairable,
        units: units.len(),
        warnings,
    })
}
