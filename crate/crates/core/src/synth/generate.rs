use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{AnnotationRecord, JudgeKind, PanelMatrix};
use crate::ranking::{Ranking, ValueId};
use crate::taxonomy::ValueTaxonomy;

/// A block of judges perturbing the shared latent truths the same way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeGroup {
    /// Judge ids are `{prefix}-{n}` for `n = 1..=n_judges`, or just
    /// `prefix` when there is a single judge.
    pub prefix: String,
    pub kind: JudgeKind,
    pub n_judges: usize,
    /// Configurations each model judge answers under; empty for experts.
    #[serde(default)]
    pub configs: Vec<String>,
    /// Probability that each top-k slot is swapped for an outside value.
    pub epsilon: f64,
    /// Per-value probability of forcing the value into a judgment's top-k.
    #[serde(default)]
    pub bias: BTreeMap<String, f64>,
}

fn default_k() -> usize {
    3
}

fn default_values() -> Vec<String> {
    ValueTaxonomy::bundled()
        .basic_values()
        .iter()
        .map(|v| v.to_string())
        .collect()
}

fn default_sentences() -> usize {
    60
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_interviews: usize,
    pub seed: u64,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_values")]
    pub values: Vec<String>,
    /// Relative odds of each value entering a latent top-k; uniform when
    /// empty. Values not listed get weight 1.
    #[serde(default)]
    pub base_weights: BTreeMap<String, f64>,
    pub groups: Vec<JudgeGroup>,
    /// Sentences per synthetic transcript.
    #[serde(default = "default_sentences")]
    pub sentences: usize,
}

impl SynthConfig {
    /// A single expert group over the bundled values.
    pub fn experts(n_interviews: usize, n_judges: usize, epsilon: f64, seed: u64) -> Self {
        SynthConfig {
            n_interviews,
            seed,
            k: default_k(),
            values: default_values(),
            base_weights: BTreeMap::new(),
            groups: vec![JudgeGroup {
                prefix: "expert".into(),
                kind: JudgeKind::Expert,
                n_judges,
                configs: vec![],
                epsilon,
                bias: BTreeMap::new(),
            }],
            sentences: default_sentences(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: SynthConfig = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text)?,
            _ => toml::from_str(&text)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n_interviews == 0 {
            return bad("n_interviews must be positive".into());
        }
        let values: BTreeSet<ValueId> = self.values.iter().map(|v| ValueId::new(v)).collect();
        if values.len() != self.values.len() {
            return bad("duplicate values".into());
        }
        if self.k == 0 || self.k > values.len() {
            return bad(format!("k = {} must lie in 1..={}", self.k, values.len()));
        }
        for (v, w) in &self.base_weights {
            if !values.contains(&ValueId::new(v)) {
                return Err(Error::UnknownValue(v.clone()));
            }
            if !w.is_finite() || *w < 0.0 {
                return bad(format!("weight of {v} must be finite and >= 0, got {w}"));
            }
        }
        let positive = self.weights().iter().filter(|w| **w > 0.0).count();
        if positive < self.k {
            return bad(format!(
                "degenerate base distribution: {positive} value(s) with positive weight, need {}",
                self.k
            ));
        }
        if self.groups.is_empty() {
            return bad("at least one judge group is required".into());
        }
        let mut ids = BTreeSet::new();
        for g in &self.groups {
            if !(0.0..=1.0).contains(&g.epsilon) {
                return bad(format!("{}: epsilon must lie in [0, 1], got {}", g.prefix, g.epsilon));
            }
            if g.n_judges == 0 {
                return bad(format!("{}: n_judges must be positive", g.prefix));
            }
            match g.kind {
                JudgeKind::Expert if !g.configs.is_empty() => {
                    return bad(format!("{}: expert groups take no configs", g.prefix))
                }
                JudgeKind::Model if g.configs.is_empty() => {
                    return bad(format!("{}: model groups need at least one config", g.prefix))
                }
                _ => {}
            }
            for (v, b) in &g.bias {
                if !values.contains(&ValueId::new(v)) {
                    return Err(Error::UnknownValue(v.clone()));
                }
                if !(0.0..=1.0).contains(b) {
                    return bad(format!("{}: bias of {v} must lie in [0, 1], got {b}", g.prefix));
                }
            }
            for id in g.judge_ids() {
                if !ids.insert(id.clone()) {
                    return Err(Error::DuplicateId(id));
                }
            }
        }
        Ok(())
    }

    fn value_ids(&self) -> Vec<ValueId> {
        self.values.iter().map(|v| ValueId::new(v)).collect()
    }

    fn weights(&self) -> Vec<f64> {
        let by_id: BTreeMap<ValueId, f64> = self
            .base_weights
            .iter()
            .map(|(v, w)| (ValueId::new(v), *w))
            .collect();
        self.value_ids()
            .iter()
            .map(|v| by_id.get(v).copied().unwrap_or(1.0))
            .collect()
    }

    pub fn interview_ids(&self) -> Vec<String> {
        let width = self.n_interviews.to_string().len();
        (1..=self.n_interviews)
            .map(|i| format!("int-{i:0width$}"))
            .collect()
    }
}

impl JudgeGroup {
    pub fn judge_ids(&self) -> Vec<String> {
        if self.n_judges == 1 {
            vec![self.prefix.clone()]
        } else {
            (1..=self.n_judges).map(|n| format!("{}-{n}", self.prefix)).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub panel: PanelMatrix,
    /// Latent top-k per interview, in panel interview order.
    pub truths: Vec<(String, Vec<ValueId>)>,
}

/// Weighted draw of `k` distinct indices.
fn draw_without_replacement(rng: &mut ChaCha8Rng, weights: &[f64], k: usize) -> Vec<usize> {
    let mut w = weights.to_vec();
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let total: f64 = w.iter().sum();
        let mut x = rng.gen::<f64>() * total;
        let mut pick = None;
        for (i, wi) in w.iter().enumerate() {
            if *wi <= 0.0 {
                continue;
            }
            pick = Some(i);
            if x < *wi {
                break;
            }
            x -= wi;
        }
        let i = pick.expect("validated: enough positive weights");
        out.push(i);
        w[i] = 0.0;
    }
    out
}

/// One judgment: perturb the latent top-k, then append the remaining
/// values in random order.
fn judge(
    rng: &mut ChaCha8Rng,
    values: &[ValueId],
    truth: &[usize],
    epsilon: f64,
    bias: &[(usize, f64)],
) -> Ranking {
    let n = values.len();
    let mut top = truth.to_vec();
    for slot in 0..top.len() {
        if rng.gen::<f64>() < epsilon {
            let outside: Vec<usize> = (0..n).filter(|i| !top.contains(i)).collect();
            if let Some(&x) = outside.choose(rng) {
                top[slot] = x;
            }
        }
    }
    for &(v, p) in bias {
        if rng.gen::<f64>() < p && !top.contains(&v) {
            let slot = rng.gen_range(0..top.len());
            top[slot] = v;
        }
    }
    let mut rest: Vec<usize> = (0..n).filter(|i| !top.contains(i)).collect();
    rest.shuffle(rng);
    let order = top.into_iter().chain(rest).map(|i| values[i].clone()).collect();
    Ranking::new(order).expect("distinct by construction")
}

/// Draws latent truths and every group's judgments.
pub fn generate(cfg: &SynthConfig) -> Result<SynthOutput> {
    cfg.validate()?;
    let values = cfg.value_ids();
    let weights = cfg.weights();
    let mut truth_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut panel = PanelMatrix::new();
    let mut truths = Vec::new();
    for g in &cfg.groups {
        for id in g.judge_ids() {
            panel.declare_judge(&id, g.kind)?;
        }
    }
    for (u, interview) in cfg.interview_ids().into_iter().enumerate() {
        let truth = draw_without_replacement(&mut truth_rng, &weights, cfg.k);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(u as u64 + 1);
        for g in &cfg.groups {
            let bias: Vec<(usize, f64)> = g
                .bias
                .iter()
                .filter_map(|(v, p)| {
                    let id = ValueId::new(v);
                    values.iter().position(|x| *x == id).map(|i| (i, *p))
                })
                .collect();
            let configs: Vec<Option<String>> = match g.kind {
                JudgeKind::Expert => vec![None],
                JudgeKind::Model => g.configs.iter().cloned().map(Some).collect(),
            };
            for id in g.judge_ids() {
                for config in &configs {
                    panel.insert(AnnotationRecord {
                        interview_id: interview.clone(),
                        judge_id: id.clone(),
                        judge_kind: g.kind,
                        config_id: config.clone(),
                        ranking: judge(&mut rng, &values, &truth, g.epsilon, &bias),
                    })?;
                }
            }
        }
        truths.push((interview, truth.iter().map(|&i| values[i].clone()).collect()));
    }
    Ok(SynthOutput { panel, truths })
}

pub fn generate_panel(cfg: &SynthConfig) -> Result<PanelMatrix> {
    generate(cfg).map(|o| o.panel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::Column;

    #[test]
    fn epsilon_zero_is_unanimous() {
        let p = generate_panel(&SynthConfig::experts(20, 4, 0.0, 1)).unwrap();
        assert_eq!(p.len(), 80);
        for i in p.interviews() {
            let tops: BTreeSet<_> = p
                .expert_columns()
                .iter()
                .map(|c| crate::ranking::top_k(p.get(i, c).unwrap(), 3).unwrap())
                .collect();
            assert_eq!(tops.len(), 1);
        }
    }

    #[test]
    fn seed_determinism() {
        let a = generate_panel(&SynthConfig::experts(10, 3, 0.4, 9)).unwrap();
        let b = generate_panel(&SynthConfig::experts(10, 3, 0.4, 9)).unwrap();
        let c = generate_panel(&SynthConfig::experts(10, 3, 0.4, 10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn full_rankings_over_all_values() {
        let p = generate_panel(&SynthConfig::experts(5, 2, 0.7, 3)).unwrap();
        for r in p.records() {
            assert_eq!(r.ranking.len(), 10);
        }
    }

    #[test]
    fn model_groups_and_bias() {
        let mut cfg = SynthConfig::experts(50, 3, 0.2, 5);
        cfg.groups.push(JudgeGroup {
            prefix: "m".into(),
            kind: JudgeKind::Model,
            n_judges: 2,
            configs: vec!["a".into(), "b".into()],
            epsilon: 0.2,
            bias: [("security".to_string(), 1.0)].into(),
        });
        let p = generate_panel(&cfg).unwrap();
        assert_eq!(p.configs_of("m-1"), ["a", "b"]);
        for i in p.interviews() {
            let r = p.get(i, &Column::model("m-2", "b")).unwrap();
            assert!(r.prefix(3).unwrap().contains(&"security".into()));
        }
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = SynthConfig::experts(5, 2, 1.5, 0);
        assert!(cfg.validate().is_err());
        cfg.groups[0].epsilon = 0.5;
        cfg.base_weights = cfg.values.iter().skip(1).map(|v| (v.clone(), 0.0)).collect();
        assert!(cfg.validate().is_err());
        cfg.base_weights.clear();
        cfg.groups.push(cfg.groups[0].clone());
        assert!(matches!(cfg.validate(), Err(Error::DuplicateId(_))));
    }

    #[test]
    fn config_file_defaults() {
        let cfg: SynthConfig = toml::from_str(
            "n_interviews = 3\nseed = 1\n[[groups]]\nprefix = \"e\"\nkind = \"expert\"\nn_judges = 2\nepsilon = 0.1\n",
        )
        .unwrap();
        assert_eq!(cfg.k, 3);
        assert_eq!(cfg.values.len(), 10);
        cfg.validate().unwrap();
    }
}
