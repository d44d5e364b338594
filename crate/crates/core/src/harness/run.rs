use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::endpoint::{ChatMessage, ChatRequest, Endpoint, TransportError, TransportKind};
use super::parse::{detect_degenerate, parse_ranking_detailed, render_ranking, Degeneracy, ParseLayer, ParseMode, Parsed};
use super::prompt::{
    build_aggregation_prompt, build_prompt, AggregationInput, PromptStrategy, PromptTemplates,
    Segmentation, Technique,
};
use super::segment::{segment_transcript, CharHeuristic, SegmentConfig, TokenEstimator};
use crate::error::{Error, Result};
use crate::ranking::Ranking;
use crate::taxonomy::ValueTaxonomy;

pub const RUN_SCHEMA_VERSION: u32 = 1;

/// One transcript to annotate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interview {
    pub id: String,
    pub transcript: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
}

/// Reads a JSON array of interviews.
pub fn load_interviews(path: &Path) -> Result<Vec<Interview>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let list: Vec<Interview> = serde_json::from_str(&text)?;
    let mut seen = std::collections::BTreeSet::new();
    for i in &list {
        if !seen.insert(i.id.as_str()) {
            return Err(Error::DuplicateId(i.id.clone()));
        }
    }
    Ok(list)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "stage", content = "index")]
pub enum Stage {
    Whole,
    Segment(usize),
    Aggregation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "status")]
pub enum CallOutcome {
    Ok,
    Degenerate { detail: Degeneracy },
    ParseFailure { message: String, recognized: Vec<String> },
    Transport { kind: TransportKind, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallRecord {
    #[serde(flatten)]
    pub stage: Stage,
    pub seed: u64,
    pub prompt_sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
    pub outcome: CallOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureCategory {
    Transport,
    Degenerate,
    Parse,
    Prompt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunFailure {
    pub category: FailureCategory,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub run_id: String,
    pub interview_id: String,
    pub endpoint_id: String,
    pub model: String,
    pub strategy_fingerprint: String,
    pub strategy: PromptStrategy,
    pub template_version: String,
    pub template_hash: String,
    /// Base seed; the i-th call of the run uses `seed + i`.
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    pub calls: Vec<CallRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parsed: Option<Ranking>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parse_layer: Option<ParseLayer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<RunFailure>,
    pub retries: u32,
    pub retry_reasons: Vec<String>,
    pub started_at: u64,
    pub finished_at: u64,
}

impl RunRecord {
    pub fn is_failed(&self) -> bool {
        self.parsed.is_none()
    }

    /// Calls a failure-free run would have made.
    pub fn expected_calls(&self) -> usize {
        match self.strategy.segmentation {
            Segmentation::Whole => 1,
            Segmentation::Split => {
                1 + self
                    .calls
                    .iter()
                    .filter_map(|c| match c.stage {
                        Stage::Segment(i) => Some(i + 1),
                        _ => None,
                    })
                    .max()
                    .unwrap_or(0)
            }
        }
    }
}

/// Seconds since the epoch, pinned by `SOURCE_DATE_EPOCH` when set.
pub fn timestamp() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.parse().ok()) {
        return t;
    }
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn sha256_hex(s: &str) -> String {
    format!("{:x}", Sha256::digest(s.as_bytes()))
}

/// Everything a run needs besides the endpoint, strategy and interview.
pub struct RunContext<'a> {
    pub taxonomy: &'a ValueTaxonomy,
    pub templates: &'a PromptTemplates,
    pub segment: SegmentConfig,
    pub estimator: &'a dyn TokenEstimator,
    pub seed: u64,
    pub max_retries: u32,
}

impl<'a> RunContext<'a> {
    pub fn new(taxonomy: &'a ValueTaxonomy, templates: &'a PromptTemplates) -> Self {
        RunContext {
            taxonomy,
            templates,
            segment: SegmentConfig::default(),
            estimator: &CharHeuristic,
            seed: 0,
            max_retries: 3,
        }
    }
}

struct Caller<'a> {
    endpoint: &'a dyn Endpoint,
    system: &'a str,
    base_seed: u64,
    max_retries: u32,
    calls: Vec<CallRecord>,
    reasons: Vec<String>,
}

impl Caller<'_> {
    /// Sends `prompt` until `accept` takes the response or retries run out.
    fn call(
        &mut self,
        stage: Stage,
        prompt: &str,
        accept: impl Fn(&str) -> std::result::Result<Parsed, CallOutcome>,
    ) -> std::result::Result<(String, Parsed), RunFailure> {
        let prompt_sha256 = sha256_hex(prompt);
        let mut last = None;
        for attempt in 0..=self.max_retries {
            let seed = self.base_seed + self.calls.len() as u64;
            let request = ChatRequest {
                model: self.endpoint.model().to_string(),
                messages: vec![ChatMessage::system(self.system), ChatMessage::user(prompt)],
                temperature: self.endpoint.temperature(),
                seed,
            };
            let (response, outcome) = match self.endpoint.complete(&request) {
                Err(TransportError { kind, message }) => (None, Err(CallOutcome::Transport { kind, message })),
                Ok(text) => {
                    let r = match detect_degenerate(&text) {
                        Some(detail) => Err(CallOutcome::Degenerate { detail }),
                        None => accept(&text),
                    };
                    (Some(text), r)
                }
            };
            match outcome {
                Ok(parsed) => {
                    let text = response.clone().unwrap_or_default();
                    self.calls.push(CallRecord {
                        stage,
                        seed,
                        prompt_sha256,
                        response,
                        outcome: CallOutcome::Ok,
                    });
                    return Ok((text, parsed));
                }
                Err(o) => {
                    let reason = describe(stage, &o);
                    self.calls.push(CallRecord {
                        stage,
                        seed,
                        prompt_sha256: prompt_sha256.clone(),
                        response,
                        outcome: o.clone(),
                    });
                    if attempt < self.max_retries {
                        self.reasons.push(reason);
                    }
                    last = Some(o);
                }
            }
        }
        let o = last.expect("at least one attempt");
        Err(RunFailure {
            category: match o {
                CallOutcome::Transport { .. } => FailureCategory::Transport,
                CallOutcome::Degenerate { .. } => FailureCategory::Degenerate,
                _ => FailureCategory::Parse,
            },
            message: format!(
                "{} after {} attempt(s)",
                describe(stage, &o),
                self.max_retries + 1
            ),
        })
    }
}

fn describe(stage: Stage, o: &CallOutcome) -> String {
    let where_ = match stage {
        Stage::Whole => "whole".to_string(),
        Stage::Segment(i) => format!("segment {i}"),
        Stage::Aggregation => "aggregation".to_string(),
    };
    match o {
        CallOutcome::Ok => format!("{where_}: ok"),
        CallOutcome::Degenerate { detail: Degeneracy::Empty } => format!("{where_}: empty output"),
        CallOutcome::Degenerate { detail: Degeneracy::Repetition { unit } } => {
            format!("{where_}: repetition loop {unit:?}")
        }
        CallOutcome::ParseFailure { message, .. } => format!("{where_}: parse failure, {message}"),
        CallOutcome::Transport { kind, message } => format!("{where_}: {kind:?} error, {message}"),
    }
}

fn parse_for(strategy: &PromptStrategy, taxonomy: &ValueTaxonomy, text: &str) -> std::result::Result<Parsed, CallOutcome> {
    let first = parse_ranking_detailed(text, taxonomy, ParseMode::Basic);
    let result = match first {
        Err(_) if strategy.has(Technique::Bup) => {
            parse_ranking_detailed(text, taxonomy, ParseMode::Subvalue).or(first)
        }
        other => other,
    };
    result.map_err(|f| CallOutcome::ParseFailure { message: f.message, recognized: f.recognized })
}

/// Annotates one interview with one strategy. Failures are recorded in the
/// returned record, never raised.
pub fn run_interview(
    endpoint: &dyn Endpoint,
    strategy: &PromptStrategy,
    interview: &Interview,
    ctx: &RunContext,
) -> RunRecord {
    let started_at = timestamp();
    let mut strategy = strategy.clone();
    if strategy.has(Technique::Pep) && strategy.profile_summary.is_none() {
        strategy.profile_summary = interview.profile.clone();
    }
    let fingerprint = strategy.fingerprint();
    let run_id = sha256_hex(&format!(
        "{}|{}|{}|{}|{}",
        endpoint.id(),
        interview.id,
        fingerprint,
        ctx.seed,
        ctx.templates.hash()
    ))[..16]
        .to_string();
    let mut caller = Caller {
        endpoint,
        system: ctx.templates.system(),
        base_seed: ctx.seed,
        max_retries: ctx.max_retries,
        calls: Vec::new(),
        reasons: Vec::new(),
    };
    let accept = |t: &str| parse_for(&strategy, ctx.taxonomy, t);

    let outcome: std::result::Result<Parsed, RunFailure> = (|| {
        let prompt_err = |e: Error| RunFailure { category: FailureCategory::Prompt, message: e.to_string() };
        match strategy.segmentation {
            Segmentation::Whole => {
                let prompt = build_prompt(&strategy, &interview.transcript, false, ctx.taxonomy, ctx.templates)
                    .map_err(prompt_err)?;
                caller.call(Stage::Whole, &prompt, accept).map(|(_, p)| p)
            }
            Segmentation::Split => {
                let segments = segment_transcript(&interview.transcript, &ctx.segment, ctx.estimator)
                    .map_err(prompt_err)?;
                let mut outputs = Vec::with_capacity(segments.len());
                for seg in &segments {
                    let prompt = build_prompt(&strategy, &seg.text, true, ctx.taxonomy, ctx.templates)
                        .map_err(prompt_err)?;
                    let (text, parsed) = caller.call(Stage::Segment(seg.index), &prompt, accept)?;
                    outputs.push(match strategy.aggregation_input {
                        AggregationInput::Rankings => render_ranking(&parsed.ranking),
                        AggregationInput::Text => text,
                    });
                }
                let prompt = build_aggregation_prompt(&strategy, &outputs, ctx.taxonomy, ctx.templates)
                    .map_err(prompt_err)?;
                let basic_only = |t: &str| {
                    parse_ranking_detailed(t, ctx.taxonomy, ParseMode::Basic).map_err(|f| {
                        CallOutcome::ParseFailure { message: f.message, recognized: f.recognized }
                    })
                };
                caller.call(Stage::Aggregation, &prompt, basic_only).map(|(_, p)| p)
            }
        }
    })();

    let mut stages: Vec<Stage> = caller.calls.iter().map(|c| c.stage).collect();
    stages.dedup();
    let retries = (caller.calls.len() - stages.len()) as u32;
    let (parsed, parse_layer, failure) = match outcome {
        Ok(p) => (Some(p.ranking), Some(p.layer), None),
        Err(f) => (None, None, Some(f)),
    };
    RunRecord {
        schema_version: RUN_SCHEMA_VERSION,
        run_id,
        interview_id: interview.id.clone(),
        endpoint_id: endpoint.id().to_string(),
        model: endpoint.model().to_string(),
        strategy_fingerprint: fingerprint,
        strategy,
        template_version: ctx.templates.version().to_string(),
        template_hash: ctx.templates.hash().to_string(),
        seed: ctx.seed,
        temperature: endpoint.temperature(),
        calls: caller.calls,
        parsed,
        parse_layer,
        failure,
        retries,
        retry_reasons: caller.reasons,
        started_at,
        finished_at: timestamp(),
    }
}

/// An endpoint with its concurrency bound and retry cap.
pub struct EndpointJob<'a> {
    pub endpoint: &'a dyn Endpoint,
    pub parallelism: usize,
    pub max_retries: u32,
}

/// Runs every (interview, strategy) pair against every endpoint. Endpoints
/// run concurrently, each with its own parallelism bound. Records come back
/// ordered by endpoint, interview, then strategy.
pub fn run_batch(
    jobs: &[EndpointJob],
    strategies: &[PromptStrategy],
    interviews: &[Interview],
    ctx: &RunContext,
) -> Result<Vec<RunRecord>> {
    for s in strategies {
        if !s.has(Technique::Pep) {
            s.validate(ctx.taxonomy)?;
        }
    }
    let pairs: Vec<(&Interview, &PromptStrategy)> = interviews
        .iter()
        .flat_map(|i| strategies.iter().map(move |s| (i, s)))
        .collect();
    let mut results: Vec<Result<Vec<RunRecord>>> = Vec::new();
    std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|job| {
                let pairs = &pairs;
                scope.spawn(move || -> Result<Vec<RunRecord>> {
                    let pool = rayon::ThreadPoolBuilder::new()
                        .num_threads(job.parallelism.max(1))
                        .build()
                        .map_err(|e| Error::Endpoint(e.to_string()))?;
                    let local = RunContext {
                        taxonomy: ctx.taxonomy,
                        templates: ctx.templates,
                        segment: ctx.segment,
                        estimator: ctx.estimator,
                        seed: ctx.seed,
                        max_retries: job.max_retries,
                    };
                    Ok(pool.install(|| {
                        pairs
                            .par_iter()
                            .map(|(i, s)| run_interview(job.endpoint, s, i, &local))
                            .collect()
                    }))
                })
            })
            .collect();
        for h in handles {
            results.push(h.join().unwrap_or_else(|_| Err(Error::Endpoint("worker panicked".into()))));
        }
    });
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;

    struct Scripted {
        replies: Mutex<Vec<std::result::Result<String, TransportError>>>,
        seeds: Mutex<Vec<u64>>,
    }

    impl Scripted {
        fn new(replies: Vec<std::result::Result<String, TransportError>>) -> Self {
            Scripted { replies: Mutex::new(replies), seeds: Mutex::new(vec![]) }
        }
    }

    impl Endpoint for Scripted {
        fn id(&self) -> &str {
            "mock"
        }
        fn model(&self) -> &str {
            "mock-model"
        }
        fn complete(&self, r: &ChatRequest) -> std::result::Result<String, TransportError> {
            self.seeds.lock().unwrap().push(r.seed);
            let mut q = self.replies.lock().unwrap();
            if q.len() > 1 { q.remove(0) } else { q[0].clone() }
        }
    }

    const VALID: &str = "1. Security\n2. Tradition\n3. Benevolence\n4. Conformity\n5. Power\n6. Achievement\n7. Hedonism\n8. Stimulation\n9. Self-Direction\n10. Universalism\n";

    fn interview() -> Interview {
        Interview { id: "i1".into(), transcript: "I grew up on a farm. We kept old customs.".into(), profile: Some("Farmer, 70.".into()) }
    }

    #[test]
    fn fixed_valid_reply() {
        let tax = ValueTaxonomy::bundled();
        let tpl = PromptTemplates::bundled();
        let ctx = RunContext::new(&tax, &tpl);
        let ep = Scripted::new(vec![Ok(VALID.into())]);
        let rec = run_interview(&ep, &"baseline-W".parse().unwrap(), &interview(), &ctx);
        assert_eq!(rec.parsed.as_ref().unwrap().len(), 10);
        assert_eq!(rec.retries, 0);
        assert_eq!(rec.calls.len(), 1);
        assert!(rec.failure.is_none());
    }

    #[test]
    fn garbage_twice_then_valid() {
        let tax = ValueTaxonomy::bundled();
        let tpl = PromptTemplates::bundled();
        let ctx = RunContext { seed: 100, ..RunContext::new(&tax, &tpl) };
        let ep = Scripted::new(vec![Ok("???".into()), Ok("".into()), Ok(VALID.into())]);
        let rec = run_interview(&ep, &"bc-W".parse().unwrap(), &interview(), &ctx);
        assert_eq!(rec.retries, 2);
        assert_eq!(rec.retry_reasons.len(), 2);
        let seeds: Vec<u64> = rec.calls.iter().map(|c| c.seed).collect();
        assert_eq!(seeds, [100, 101, 102]);
        assert_eq!(*ep.seeds.lock().unwrap(), seeds);
        assert_eq!(rec.calls.len() - rec.expected_calls(), rec.retries as usize);
    }

    #[test]
    fn endpoint_down() {
        let tax = ValueTaxonomy::bundled();
        let tpl = PromptTemplates::bundled();
        let ctx = RunContext { max_retries: 1, ..RunContext::new(&tax, &tpl) };
        let ep = Scripted::new(vec![Err(TransportError { kind: TransportKind::Transport, message: "refused".into() })]);
        let rec = run_interview(&ep, &"baseline-W".parse().unwrap(), &interview(), &ctx);
        assert!(rec.is_failed());
        assert_eq!(rec.failure.unwrap().category, FailureCategory::Transport);
        assert_eq!(rec.calls.len(), 2);
    }

    #[test]
    fn split_mode_aggregates() {
        let tax = ValueTaxonomy::bundled();
        let tpl = PromptTemplates::bundled();
        let ctx = RunContext {
            segment: SegmentConfig { budget: 6, word_fallback: false },
            ..RunContext::new(&tax, &tpl)
        };
        let ep = Scripted::new(vec![Ok(VALID.into())]);
        let rec = run_interview(&ep, &"pep-S".parse().unwrap(), &interview(), &ctx);
        let stages: Vec<Stage> = rec.calls.iter().map(|c| c.stage).collect();
        assert_eq!(stages, [Stage::Segment(0), Stage::Segment(1), Stage::Aggregation]);
        assert_eq!(rec.expected_calls(), 3);
        assert_eq!(rec.strategy.profile_summary.as_deref(), Some("Farmer, 70."));
        assert!(rec.parsed.is_some());
    }

    #[test]
    fn pep_without_profile_is_prompt_failure() {
        let tax = ValueTaxonomy::bundled();
        let tpl = PromptTemplates::bundled();
        let ctx = RunContext::new(&tax, &tpl);
        let ep = Scripted::new(vec![Ok(VALID.into())]);
        let mut i = interview();
        i.profile = None;
        let rec = run_interview(&ep, &"pep-W".parse().unwrap(), &i, &ctx);
        assert_eq!(rec.failure.unwrap().category, FailureCategory::Prompt);
        assert!(rec.calls.is_empty());
    }
}
