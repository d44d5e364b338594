//! Interview-level percentile bootstrap.
//!
//! Replicate `b` draws its resample from a ChaCha8 stream keyed by
//! `(seed, b)`, so serial and parallel execution give identical replicates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub confidence: f64,
    pub seed: u64,
    #[serde(default = "default_parallel")]
    pub parallel: bool,
}

fn default_parallel() -> bool {
    true
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            replicates: 10_000,
            confidence: 0.95,
            seed: 0,
            parallel: true,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates < 100 {
            return Err(Error::InvalidArgument(format!(
                "bootstrap needs at least 100 replicates, got {}",
                self.replicates
            )));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "confidence must lie in (0, 1), got {}",
                self.confidence
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    /// Mean of the replicate means.
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
    pub replicates: usize,
    pub seed: u64,
    pub method: String,
    /// Interviews in the input, defined or not.
    pub interviews: usize,
    /// Interviews whose statistic is undefined.
    pub undefined: usize,
    /// Replicates that drew at least one undefined interview.
    pub replicates_with_exclusions: usize,
    /// Replicates that drew only undefined interviews and were discarded.
    pub replicates_discarded: usize,
}

/// Mean computed around a shift so a constant sample returns the constant
/// exactly.
fn shifted_mean(shift: f64, xs: impl Iterator<Item = f64>) -> Option<f64> {
    let mut acc = 0.0;
    let mut n = 0usize;
    for x in xs {
        acc += x - shift;
        n += 1;
    }
    (n > 0).then(|| shift + acc / n as f64)
}

/// Nearest-rank percentile of sorted data; never interpolates.
fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let pos = (q * n as f64 - 1e-9).ceil().max(1.0) as usize;
    sorted[pos.min(n) - 1]
}

/// One replicate: resample interview indices and average the defined
/// statistics among them.
fn replicate(stats: &[Option<f64>], shift: f64, seed: u64, index: u64) -> (Option<f64>, bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let n = stats.len() as u64;
    let mut excluded = false;
    let mut acc = 0.0;
    let mut count = 0usize;
    for _ in 0..n {
        let i = rng.gen_range(0..n) as usize;
        match stats[i] {
            Some(x) => {
                acc += x - shift;
                count += 1;
            }
            None => excluded = true,
        }
    }
    ((count > 0).then(|| shift + acc / count as f64), excluded)
}

pub fn bootstrap(stats: &[Option<f64>], cfg: &BootstrapConfig) -> Result<BootstrapResult> {
    cfg.validate()?;
    let defined: Vec<f64> = stats.iter().flatten().copied().collect();
    if defined.is_empty() {
        return Err(Error::Insufficient("every statistic is undefined".into()));
    }
    if defined.len() < 2 {
        return Err(Error::Insufficient(
            "bootstrap needs at least 2 interviews with a defined statistic".into(),
        ));
    }
    let shift = defined[0];

    let run = |b: usize| replicate(stats, shift, cfg.seed, b as u64);
    let reps: Vec<(Option<f64>, bool)> = if cfg.parallel {
        (0..cfg.replicates).into_par_iter().map(run).collect()
    } else {
        (0..cfg.replicates).map(run).collect()
    };

    let replicates_with_exclusions = reps.iter().filter(|(_, e)| *e).count();
    let mut values: Vec<f64> = reps.iter().filter_map(|(v, _)| *v).collect();
    let replicates_discarded = cfg.replicates - values.len();
    let mean = shifted_mean(shift, values.iter().copied()).expect("at least one replicate");
    values.sort_by(f64::total_cmp);
    let tail = (1.0 - cfg.confidence) / 2.0;
    Ok(BootstrapResult {
        mean,
        ci_low: nearest_rank(&values, tail),
        ci_high: nearest_rank(&values, 1.0 - tail),
        confidence: cfg.confidence,
        replicates: cfg.replicates,
        seed: cfg.seed,
        method: "percentile (nearest rank)".to_string(),
        interviews: stats.len(),
        undefined: stats.len() - defined.len(),
        replicates_with_exclusions,
        replicates_discarded,
    })
}
