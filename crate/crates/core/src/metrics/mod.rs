//! Pairwise and panel-level agreement metrics. Every score lies in [0, 1]
//! except alpha and Spearman's rho.

mod alpha;
mod rbo;
mod set;
mod vector;

pub use alpha::{
    krippendorff_alpha, pairable_units, AlphaConfig, AlphaOutcome, SetDistance,
};
pub use rbo::{prefix_agreements, rbo_at_k, rbo_series_terms, DepthPolicy, RboConfig, RboScore};
pub use set::{f1_at_k, jaccard_at_k};
pub use vector::{average_ranks, cosine, spearman_rho, Correlation, ScoreVector};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranking::{top_k, top_k_clipped, Ranking};

/// The three per-interview scores reported against ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "F1@k")]
    F1,
    #[serde(rename = "Jaccard@k")]
    Jaccard,
    #[serde(rename = "RBO@k")]
    Rbo,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::F1, Metric::Jaccard, Metric::Rbo];

    pub fn label(self, k: usize) -> String {
        match self {
            Metric::F1 => format!("F1@{k}"),
            Metric::Jaccard => format!("Jaccard@{k}"),
            Metric::Rbo => format!("RBO@{k}"),
        }
    }
}

/// Scoring settings shared by every analysis that compares a judgment to
/// a reference ranking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreConfig {
    pub k: usize,
    pub rbo_p: f64,
    pub depth_policy: DepthPolicy,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig {
            k: 3,
            rbo_p: 0.9,
            depth_policy: DepthPolicy::Strict,
        }
    }
}

impl ScoreConfig {
    pub fn rbo(&self) -> RboConfig {
        RboConfig {
            p: self.rbo_p,
            k: self.k,
            depth_policy: self.depth_policy,
        }
    }
}

/// One judgment scored against a reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub f1: f64,
    pub jaccard: f64,
    pub rbo: f64,
    /// True when lenient scoring evaluated a shorter depth than `k`.
    pub clipped: bool,
}

impl Scores {
    pub fn get(&self, m: Metric) -> f64 {
        match m {
            Metric::F1 => self.f1,
            Metric::Jaccard => self.jaccard,
            Metric::Rbo => self.rbo,
        }
    }
}

/// Scores `judged` against `reference` at depth `cfg.k`.
pub fn score_against(judged: &Ranking, reference: &Ranking, cfg: &ScoreConfig) -> Result<Scores> {
    let short = judged.len().min(reference.len()) < cfg.k;
    let (a, b) = match (short, cfg.depth_policy) {
        (true, DepthPolicy::Strict) => {
            return Err(Error::KTooLarge {
                k: cfg.k,
                len: judged.len().min(reference.len()),
            })
        }
        (true, DepthPolicy::Lenient) => {
            (top_k_clipped(judged, cfg.k), top_k_clipped(reference, cfg.k))
        }
        (false, _) => (top_k(judged, cfg.k)?, top_k(reference, cfg.k)?),
    };
    let rbo = rbo_at_k(judged, reference, &cfg.rbo())?;
    Ok(Scores {
        f1: f1_at_k(&a, &b)?,
        jaccard: jaccard_at_k(&a, &b)?,
        rbo: rbo.value,
        clipped: short,
    })
}

/// Arithmetic mean; `None` for an empty slice.
pub fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Population standard deviation; `None` for an empty slice.
pub fn population_std(xs: &[f64]) -> Option<f64> {
    let m = mean(xs)?;
    Some((xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt())
}
