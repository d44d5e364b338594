use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranking::Ranking;

/// How rankings shorter than the evaluation depth are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DepthPolicy {
    /// Short rankings are an error.
    #[default]
    Strict,
    /// Evaluate at the shorter length and flag the score.
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RboConfig {
    pub p: f64,
    pub k: usize,
    #[serde(default)]
    pub depth_policy: DepthPolicy,
}

impl Default for RboConfig {
    fn default() -> Self {
        RboConfig {
            p: 0.9,
            k: 3,
            depth_policy: DepthPolicy::Strict,
        }
    }
}

impl RboConfig {
    pub fn new(p: f64, k: usize) -> Result<Self> {
        let cfg = RboConfig {
            p,
            k,
            depth_policy: DepthPolicy::Strict,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "RBO persistence must lie in (0, 1), got {}",
                self.p
            )));
        }
        if self.k == 0 {
            return Err(Error::InvalidArgument("RBO depth must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RboScore {
    pub value: f64,
    /// Depth actually evaluated.
    pub depth: usize,
    /// Set when lenient mode clipped the depth below `k`.
    pub clipped: bool,
}

/// Agreement `|a[..d] ∩ b[..d]| / d` for `d = 1..=depth`.
pub fn prefix_agreements(a: &Ranking, b: &Ranking, depth: usize) -> Vec<f64> {
    let depth = depth.min(a.len()).min(b.len());
    let mut seen_a = std::collections::HashSet::new();
    let mut seen_b = std::collections::HashSet::new();
    let mut overlap = 0usize;
    let mut out = Vec::with_capacity(depth);
    for d in 0..depth {
        let (x, y) = (&a.items()[d], &b.items()[d]);
        if x == y {
            overlap += 1;
        } else {
            if seen_b.contains(x) {
                overlap += 1;
            }
            if seen_a.contains(y) {
                overlap += 1;
            }
        }
        seen_a.insert(x);
        seen_b.insert(y);
        out.push(overlap as f64 / (d + 1) as f64);
    }
    out
}

/// Terms `(1 - p) p^(d-1) A_d` of the unnormalized RBO series for
/// `d = 1..=depth`.
pub fn rbo_series_terms(a: &Ranking, b: &Ranking, p: f64, depth: usize) -> Vec<f64> {
    let mut w = 1.0 - p;
    prefix_agreements(a, b, depth)
        .into_iter()
        .map(|a_d| {
            let t = w * a_d;
            w *= p;
            t
        })
        .collect()
}

/// Finite-prefix RBO normalized by its weight mass, so identical
/// depth-k prefixes score exactly 1.
pub fn rbo_at_k(a: &Ranking, b: &Ranking, cfg: &RboConfig) -> Result<RboScore> {
    cfg.validate()?;
    let shortest = a.len().min(b.len());
    let (depth, clipped) = if shortest >= cfg.k {
        (cfg.k, false)
    } else {
        match cfg.depth_policy {
            DepthPolicy::Strict => {
                return Err(Error::KTooLarge {
                    k: cfg.k,
                    len: shortest,
                })
            }
            DepthPolicy::Lenient => (shortest, true),
        }
    };

    let agreements = prefix_agreements(a, b, depth);
    let mut num = 0.0;
    let mut den = 0.0;
    let mut w = 1.0;
    for a_d in agreements {
        num += w * a_d;
        den += w;
        w *= cfg.p;
    }
    Ok(RboScore {
        value: num / den,
        depth,
        clipped,
    })
}
