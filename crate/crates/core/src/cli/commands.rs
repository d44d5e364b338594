use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Serialize;

use super::manifest::RunManifest;
use super::output::{num, opt, pct, Artifacts};
use super::{
    AnalysisArgs, Command, DistributionArgs, EnsembleArgs, EvaluateArgs, Outcome, RunArgs,
    SynthArgs,
};
use crate::aggregation::{
    build_ground_truth, human_ceiling, leave_one_model_out, Completeness, DeltaReport,
    EnsembleConfig, GroundTruthSet, Method, TiePolicy,
};
use crate::error::{Error, Result};
use crate::evaluate::{evaluate, EvaluationReport};
use crate::harness::{
    append_runs, load_interviews, load_runs, run_batch, runs_to_panel, write_runs,
    AggregationInput, EndpointJob, EndpointsFile, HttpEndpoint, PromptStrategy, PromptTemplates,
    RunContext, RunRecord, SegmentConfig,
};
use crate::metrics::{AlphaConfig, DepthPolicy, Metric, ScoreConfig, SetDistance};
use crate::panel::{JudgeKind, PanelMatrix};
use crate::synth::{generate, synth_corpus, SynthConfig};
use crate::taxonomy::{LoadMode, ValueTaxonomy};
use crate::uncertainty::{
    global_distribution, render_global_chart, uncertainty_analysis, BootstrapConfig,
    BootstrapResult, Source, Weighting,
};

pub fn execute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Ceiling(a) => cmd_ceiling(a),
        Command::Ensemble(a) => cmd_ensemble(a),
        Command::Uncertainty(a) => cmd_uncertainty(a),
        Command::Global(a) => cmd_global(a),
        Command::Run(a) => cmd_run(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

fn base_manifest(command: &str, out: &Path) -> RunManifest {
    RunManifest {
        tool: "valign".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        inputs: vec![],
        output_dir: out.display().to_string(),
        k: 3,
        rbo_p: 0.9,
        depth_policy: "strict".into(),
        alpha_distance: "jaccard".into(),
        tie_policy: TiePolicy::default().name().into(),
        bootstrap_replicates: 0,
        seed: 0,
        extra: BTreeMap::new(),
    }
}

fn load_taxonomy(path: Option<&Path>, m: &mut RunManifest) -> Result<ValueTaxonomy> {
    match path {
        Some(p) => {
            m.add_input("taxonomy", p)?;
            ValueTaxonomy::load(p, LoadMode::Strict)
        }
        None => Ok(ValueTaxonomy::bundled()),
    }
}

/// Resolved settings shared by the analysis subcommands.
struct Analysis {
    taxonomy: ValueTaxonomy,
    panel: PanelMatrix,
    score: ScoreConfig,
    alpha: AlphaConfig,
    policy: TiePolicy,
    completeness: Completeness,
    manifest: RunManifest,
    warnings: Vec<String>,
}

impl Analysis {
    fn load(command: &str, a: &AnalysisArgs) -> Result<Self> {
        let policy: TiePolicy = a.tie_policy.parse()?;
        let distance: SetDistance = a.alpha_distance.parse()?;
        let (depth_policy, completeness) = if a.lenient {
            (DepthPolicy::Lenient, Completeness::Lenient)
        } else {
            (DepthPolicy::Strict, Completeness::Strict)
        };
        let score = ScoreConfig {
            k: a.k,
            rbo_p: a.rbo_p,
            depth_policy,
        };
        score.rbo().validate()?;
        if a.k == 0 {
            return Err(Error::InvalidArgument("k must be positive".into()));
        }

        let mut m = base_manifest(command, &a.out);
        m.k = a.k;
        m.rbo_p = a.rbo_p;
        m.depth_policy = if a.lenient { "lenient" } else { "strict" }.into();
        m.alpha_distance = distance.name().into();
        m.tie_policy = policy.name().into();
        m.bootstrap_replicates = a.bootstrap_b;
        m.seed = a.seed;

        let taxonomy = load_taxonomy(a.taxonomy.as_deref(), &mut m)?;
        let mut warnings: Vec<String> = taxonomy.warnings().to_vec();
        let mut panel = match &a.panel {
            Some(p) => {
                m.add_input("panel", p)?;
                PanelMatrix::load(p)?
            }
            None => PanelMatrix::new(),
        };
        for r in &a.runs {
            m.add_input("runs", r)?;
            let loaded = load_runs(r)?;
            warnings.extend(loaded.warnings);
            let (models, w) = runs_to_panel(&loaded.records)?;
            warnings.extend(w);
            panel.merge(&models)?;
        }
        if panel.is_empty() {
            return Err(Error::Empty("panel (pass --panel and/or --runs)"));
        }
        panel.validate(&taxonomy)?;
        Ok(Analysis {
            taxonomy,
            panel,
            score,
            alpha: AlphaConfig { distance, k: a.k },
            policy,
            completeness,
            manifest: m,
            warnings,
        })
    }

    fn ground_truth(&mut self) -> Result<GroundTruthSet> {
        let experts = self.panel.expert_columns();
        if experts.is_empty() {
            return Err(Error::Empty("expert judgments"));
        }
        let gt = build_ground_truth(&self.panel, &experts, self.score.k, self.policy)?;
        if !gt.incomplete.is_empty() {
            let msg = format!(
                "ground truth built from incomplete expert panels for: {}",
                gt.incomplete.join(", ")
            );
            match self.completeness {
                Completeness::Strict => return Err(Error::Panel(msg)),
                Completeness::Lenient => self.warnings.push(msg),
            }
        }
        if !gt.skipped.is_empty() {
            self.warnings.push(format!(
                "no ground truth (fewer than 2 expert judgments) for: {}",
                gt.skipped.join(", ")
            ));
        }
        if gt.truths.is_empty() {
            return Err(Error::Empty("ground truth"));
        }
        Ok(gt)
    }
}

fn metric_header(k: usize, parts: &[&str]) -> Vec<String> {
    let mut out = Vec::new();
    for m in Metric::ALL {
        for p in parts {
            out.push(if p.is_empty() {
                m.label(k)
            } else {
                format!("{} {p}", m.label(k))
            });
        }
    }
    out
}

fn header<'a>(fixed: &[&'a str], rest: &'a [String]) -> Vec<&'a str> {
    fixed.iter().copied().chain(rest.iter().map(String::as_str)).collect()
}

fn finish(arts: Artifacts, warnings: Vec<String>) -> Result<Outcome> {
    Ok(Outcome {
        written: arts.finish()?,
        warnings,
    })
}

#[derive(Serialize)]
struct EvaluateOutput<'a> {
    ground_truth: &'a GroundTruthSet,
    evaluation: &'a EvaluationReport,
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<Outcome> {
    let a = &args.common;
    let mut an = Analysis::load("evaluate", a)?;
    let gt = an.ground_truth()?;
    let report = evaluate(&an.panel, &gt, &an.score, &an.alpha)?;
    an.warnings.extend(report.warnings.iter().cloned());
    let k = a.k;

    let mut arts = Artifacts::new(&a.out, an.manifest.clone())?;
    arts.json(
        "evaluate.json",
        &EvaluateOutput {
            ground_truth: &gt,
            evaluation: &report,
        },
    )?;

    let ms = metric_header(k, &["mean", "std"]);
    let rows: Vec<Vec<String>> = report
        .per_model
        .iter()
        .map(|r| {
            let mut row = vec![r.model.clone(), r.configs.to_string()];
            for m in Metric::ALL {
                row.push(pct(r.scores[&m].mean));
                row.push(pct(r.scores[&m].std));
            }
            row.push(opt(r.alpha, num));
            row
        })
        .collect();
    let mut h = header(&["model", "configs"], &ms);
    h.push("alpha");
    arts.csv("per_model.csv", &h, &rows)?;

    let rows: Vec<Vec<String>> = report
        .per_prompt
        .iter()
        .map(|r| {
            let mut row = vec![r.config.clone(), r.models.to_string()];
            for m in Metric::ALL {
                row.push(pct(r.scores[&m].mean));
                row.push(pct(r.scores[&m].std));
            }
            row
        })
        .collect();
    arts.csv("per_prompt.csv", &header(&["config", "models"], &ms), &rows)?;

    let single = metric_header(k, &[""]);
    let rows: Vec<Vec<String>> = report
        .per_config
        .iter()
        .map(|r| {
            let mut row = vec![r.model.clone(), r.config.clone(), r.interviews.to_string()];
            row.extend(Metric::ALL.iter().map(|m| pct(r.mean[m])));
            row
        })
        .collect();
    arts.csv(
        "per_config.csv",
        &header(&["model", "config", "interviews"], &single),
        &rows,
    )?;
    finish(arts, an.warnings)
}

fn cmd_ceiling(a: &AnalysisArgs) -> Result<Outcome> {
    let mut an = Analysis::load("ceiling", a)?;
    let judges = an.panel.judges_of_kind(JudgeKind::Expert);
    let report = human_ceiling(&an.panel, &judges, &an.score, an.policy, an.completeness)?;
    an.warnings.extend(report.warnings.iter().cloned());

    let mut arts = Artifacts::new(&a.out, an.manifest.clone())?;
    arts.json("ceiling.json", &report)?;
    let ms = metric_header(a.k, &["mean", "std"]);
    let mut rows: Vec<Vec<String>> = report
        .per_judge
        .iter()
        .map(|j| {
            let mut row = vec![j.judge_id.clone(), j.interviews.to_string()];
            for m in Metric::ALL {
                row.push(pct(j.mean[&m]));
                row.push(String::new());
            }
            row
        })
        .collect();
    let mut all = vec!["overall".to_string(), report.pooled.to_string()];
    for m in Metric::ALL {
        all.push(pct(report.overall[&m].mean));
        all.push(pct(report.overall[&m].std));
    }
    rows.push(all);
    arts.csv("ceiling.csv", &header(&["judge", "scores"], &ms), &rows)?;
    finish(arts, an.warnings)
}

#[derive(Serialize)]
struct EnsembleOutput<'a> {
    /// `all`, `best:<config>` or `list`.
    config_selection: &'a str,
    configs: &'a [String],
    model_subsets: Vec<Vec<String>>,
    reports: &'a [DeltaReport],
}

fn cmd_ensemble(args: &EnsembleArgs) -> Result<Outcome> {
    let a = &args.common;
    let mut an = Analysis::load("ensemble", a)?;
    let methods: Vec<Method> = match args.method.as_str() {
        "all" => Method::ALL.to_vec(),
        m => vec![m.parse()?],
    };
    let gt = an.ground_truth()?;
    let models = an.panel.judges_of_kind(JudgeKind::Model);
    let all_configs = an.panel.model_configs();
    let (selection, configs) = match args.configs.as_str() {
        "all" => ("all".to_string(), all_configs),
        "best" => {
            let eval = evaluate(&an.panel, &gt, &an.score, &an.alpha)?;
            let best = eval
                .per_prompt
                .iter()
                .fold(None::<(&str, f64)>, |acc, r| {
                    let f = r.scores[&Metric::F1].mean;
                    match acc {
                        Some((_, b)) if b >= f => acc,
                        _ => Some((r.config.as_str(), f)),
                    }
                })
                .map(|(c, _)| c.to_string())
                .ok_or(Error::Empty("model configurations"))?;
            (format!("best:{best}"), vec![best])
        }
        list => {
            let chosen: Vec<String> = list.split(',').map(|s| s.trim().to_string()).collect();
            for c in &chosen {
                if !all_configs.contains(c) {
                    return Err(Error::InvalidArgument(format!("no model judgments for config `{c}`")));
                }
            }
            ("list".to_string(), chosen)
        }
    };
    an.manifest.set("methods", methods.iter().map(|m| m.name()).collect::<Vec<_>>().join(","));
    an.manifest.set("config_selection", &selection);

    let mut reports = Vec::new();
    for method in &methods {
        let cfg = EnsembleConfig {
            method: *method,
            tie_policy: an.policy,
            score: an.score,
        };
        let r = leave_one_model_out(&an.panel, &models, &configs, &gt, &cfg)?;
        an.warnings.extend(r.warnings.iter().map(|w| format!("{}: {w}", method.name())));
        reports.push(r);
    }
    let subsets: BTreeSet<Vec<String>> = reports
        .iter()
        .flat_map(|r| r.combinations.iter().map(|c| c.models.clone()))
        .collect();

    let mut arts = Artifacts::new(&a.out, an.manifest.clone())?;
    arts.json(
        "ensemble.json",
        &EnsembleOutput {
            config_selection: &selection,
            configs: &configs,
            model_subsets: subsets.into_iter().collect(),
            reports: &reports,
        },
    )?;

    let mut rows = Vec::new();
    for r in &reports {
        for m in Metric::ALL {
            let d = &r.summary[&m];
            rows.push(vec![
                r.method.label().to_string(),
                m.label(a.k),
                selection.clone(),
                pct(d.ensemble_mean),
                pct(d.standalone_mean),
                pct(d.delta.mean),
                pct(d.delta.std),
            ]);
        }
    }
    arts.csv(
        "ensemble_delta.csv",
        &["method", "metric", "configs", "ensemble", "standalone", "delta mean", "delta std"],
        &rows,
    )?;

    let single = metric_header(a.k, &["ensemble", "standalone", "delta"]);
    let mut rows = Vec::new();
    let mut rankings = Vec::new();
    for r in &reports {
        for c in &r.combinations {
            let mut row = vec![
                r.method.name().to_string(),
                c.config_id.clone(),
                c.models.join("+"),
                c.interviews.len().to_string(),
                c.dropped.len().to_string(),
            ];
            for m in Metric::ALL {
                for map in [&c.ensemble, &c.standalone, &c.delta] {
                    row.push(map.get(&m).map(|x| pct(*x)).unwrap_or_default());
                }
            }
            rows.push(row);
            for i in &c.interviews {
                rankings.push(vec![
                    r.method.name().to_string(),
                    c.config_id.clone(),
                    c.models.join("+"),
                    i.interview_id.clone(),
                    i.ranking.items().iter().map(|v| v.as_str()).collect::<Vec<_>>().join(" > "),
                    i.ties.len().to_string(),
                ]);
            }
        }
    }
    arts.csv(
        "ensemble_combinations.csv",
        &header(&["method", "config", "models", "interviews", "dropped"], &single),
        &rows,
    )?;
    arts.csv(
        "ensemble_rankings.csv",
        &["method", "config", "models", "interview", "ranking", "ties"],
        &rankings,
    )?;
    finish(arts, an.warnings)
}

fn bootstrap_cells(r: &Option<BootstrapResult>) -> [String; 3] {
    match r {
        Some(b) => [num(b.mean), num(b.ci_low), num(b.ci_high)],
        None => Default::default(),
    }
}

fn cmd_uncertainty(args: &DistributionArgs) -> Result<Outcome> {
    let a = &args.common;
    let mut an = Analysis::load("uncertainty", a)?;
    let weighting = parse_weighting(&args.weighting)?;
    an.manifest.set("weighting", &args.weighting);
    an.manifest.set("confidence", args.confidence);
    let cfg = BootstrapConfig {
        replicates: a.bootstrap_b,
        confidence: args.confidence,
        seed: a.seed,
        parallel: true,
    };
    let report = uncertainty_analysis(&an.panel, &an.taxonomy, a.k, weighting, &cfg)?;
    an.warnings.extend(report.warnings.iter().cloned());

    let mut arts = Artifacts::new(&a.out, an.manifest.clone())?;
    arts.json("uncertainty.json", &report)?;
    let rows: Vec<Vec<String>> = report
        .sources
        .iter()
        .map(|s| {
            let mut row = vec![s.source.label(), s.interviews.to_string()];
            row.extend(bootstrap_cells(&s.median_std));
            row.extend(bootstrap_cells(&s.cosine));
            row.extend(bootstrap_cells(&s.spearman));
            row.push(s.spearman_undefined.to_string());
            row
        })
        .collect();
    arts.csv(
        "uncertainty.csv",
        &[
            "source",
            "interviews",
            "median std",
            "median std low",
            "median std high",
            "cosine",
            "cosine low",
            "cosine high",
            "spearman",
            "spearman low",
            "spearman high",
            "spearman undefined",
        ],
        &rows,
    )?;
    let rows: Vec<Vec<String>> = report
        .per_interview
        .iter()
        .map(|i| {
            vec![
                i.interview_id.clone(),
                i.source.label(),
                num(i.median_std),
                opt(i.cosine, num),
                opt(i.spearman, num),
            ]
        })
        .collect();
    arts.csv(
        "uncertainty_interviews.csv",
        &["interview", "source", "median std", "cosine", "spearman"],
        &rows,
    )?;
    finish(arts, an.warnings)
}

fn parse_weighting(s: &str) -> Result<Weighting> {
    match s {
        "binary" => Ok(Weighting::Binary),
        "rank-weighted" => Ok(Weighting::RankWeighted),
        other => Err(Error::InvalidArgument(format!("unknown weighting `{other}`"))),
    }
}

fn cmd_global(args: &DistributionArgs) -> Result<Outcome> {
    let a = &args.common;
    let mut an = Analysis::load("global", a)?;
    let weighting = parse_weighting(&args.weighting)?;
    an.manifest.set("weighting", &args.weighting);
    let sources = Source::all(&an.panel);
    let dist = global_distribution(&an.panel, &an.taxonomy, &sources, a.k, weighting)?;
    for s in &dist.sources {
        if !s.missing.is_empty() {
            an.warnings.push(format!(
                "{}: {} missing judgment(s) count as no assignment",
                s.source,
                s.missing.len()
            ));
        }
    }

    let mut arts = Artifacts::new(&a.out, an.manifest.clone())?;
    arts.json("global.json", &dist)?;
    let mut rows = Vec::new();
    for s in &dist.sources {
        for (i, v) in dist.values.iter().enumerate() {
            rows.push(vec![
                s.source.label(),
                v.clone(),
                s.members.len().to_string(),
                num(s.mean[i]),
                num(s.std[i]),
            ]);
        }
    }
    arts.csv("global.csv", &["source", "value", "members", "mean", "std"], &rows)?;
    arts.svg(
        "global.svg",
        &render_global_chart(&dist, "Value assignments across the corpus"),
    )?;
    finish(arts, an.warnings)
}

#[derive(Serialize)]
struct RunSummary<'a> {
    store: String,
    records: usize,
    failed: usize,
    retries: u32,
    runs: Vec<RunRow<'a>>,
}

#[derive(Serialize)]
struct RunRow<'a> {
    endpoint_id: &'a str,
    interview_id: &'a str,
    strategy: &'a str,
    calls: usize,
    retries: u32,
    failure: Option<String>,
}

fn cmd_run(a: &RunArgs) -> Result<Outcome> {
    let out_dir = a.out.clone().unwrap_or_else(|| {
        a.runs.parent().map(Path::to_path_buf).unwrap_or_default()
    });
    let mut m = base_manifest("run", &out_dir);
    m.seed = a.seed;
    let taxonomy = load_taxonomy(a.taxonomy.as_deref(), &mut m)?;
    let templates = match &a.templates {
        Some(p) => {
            m.add_input("templates", p)?;
            PromptTemplates::load(p)?
        }
        None => PromptTemplates::bundled(),
    };
    m.add_input("endpoints", &a.endpoints)?;
    m.add_input("interviews", &a.interviews)?;
    let endpoint_cfgs = EndpointsFile::load(&a.endpoints)?;
    let interviews = load_interviews(&a.interviews)?;
    let aggregation_input = match a.aggregation_input.as_str() {
        "rankings" => AggregationInput::Rankings,
        "text" => AggregationInput::Text,
        other => {
            return Err(Error::InvalidArgument(format!("unknown aggregation input `{other}`")))
        }
    };
    let mut strategies = if a.strategies == "grid" {
        PromptStrategy::standard_grid()
    } else {
        a.strategies
            .split(',')
            .map(|s| s.trim().parse())
            .collect::<Result<Vec<PromptStrategy>>>()?
    };
    for s in &mut strategies {
        s.aggregation_input = aggregation_input;
    }
    m.set("strategies", strategies.iter().map(|s| s.fingerprint()).collect::<Vec<_>>().join(","));
    m.set("segment_budget", a.segment_budget);
    m.set("aggregation_input", &a.aggregation_input);
    m.set("template_version", templates.version());
    m.set("template_hash", templates.hash());

    let mut ctx = RunContext::new(&taxonomy, &templates);
    ctx.seed = a.seed;
    ctx.segment = SegmentConfig {
        budget: a.segment_budget,
        word_fallback: a.word_fallback,
    };
    let endpoints: Vec<HttpEndpoint> = endpoint_cfgs
        .into_iter()
        .map(HttpEndpoint::new)
        .collect::<Result<_>>()?;

    let mut warnings = Vec::new();
    let existing: Vec<RunRecord> = if a.resume && a.runs.exists() {
        let loaded = load_runs(&a.runs)?;
        warnings.extend(loaded.warnings);
        loaded.records
    } else {
        Vec::new()
    };
    let done: BTreeSet<(String, String, String)> = existing
        .iter()
        .filter(|r| !r.is_failed())
        .map(|r| {
            (
                r.endpoint_id.clone(),
                r.interview_id.clone(),
                r.strategy_fingerprint.clone(),
            )
        })
        .collect();

    let mut fresh = Vec::new();
    if done.is_empty() {
        let jobs: Vec<EndpointJob> = endpoints
            .iter()
            .map(|e| EndpointJob {
                endpoint: e,
                parallelism: e.config().parallelism,
                max_retries: e.config().max_retries,
            })
            .collect();
        fresh = run_batch(&jobs, &strategies, &interviews, &ctx)?;
    } else {
        for e in &endpoints {
            let job = EndpointJob {
                endpoint: e,
                parallelism: e.config().parallelism,
                max_retries: e.config().max_retries,
            };
            for interview in &interviews {
                let todo: Vec<PromptStrategy> = strategies
                    .iter()
                    .filter(|s| {
                        !done.contains(&(
                            e.config().id.clone(),
                            interview.id.clone(),
                            s.fingerprint(),
                        ))
                    })
                    .cloned()
                    .collect();
                if !todo.is_empty() {
                    fresh.extend(run_batch(
                        std::slice::from_ref(&job),
                        &todo,
                        std::slice::from_ref(interview),
                        &ctx,
                    )?);
                }
            }
        }
    }

    if a.resume {
        append_runs(&a.runs, &fresh)?;
    } else {
        write_runs(&a.runs, &fresh)?;
    }
    let failed: Vec<&RunRecord> = fresh.iter().filter(|r| r.is_failed()).collect();
    for r in &failed {
        warnings.push(format!(
            "{} / {} / {}: {}",
            r.endpoint_id,
            r.interview_id,
            r.strategy_fingerprint,
            r.failure.as_ref().map(|f| f.message.as_str()).unwrap_or("failed")
        ));
    }

    let mut written = vec![a.runs.clone()];
    if let Some(out) = &a.out {
        let mut arts = Artifacts::new(out, m)?;
        let runs: Vec<RunRow> = fresh
            .iter()
            .map(|r| RunRow {
                endpoint_id: &r.endpoint_id,
                interview_id: &r.interview_id,
                strategy: &r.strategy_fingerprint,
                calls: r.calls.len(),
                retries: r.retries,
                failure: r.failure.as_ref().map(|f| f.message.clone()),
            })
            .collect();
        let summary = RunSummary {
            store: a.runs.display().to_string(),
            records: fresh.len(),
            failed: failed.len(),
            retries: fresh.iter().map(|r| r.retries).sum(),
            runs,
        };
        arts.json("run_summary.json", &summary)?;
        let rows: Vec<Vec<String>> = summary
            .runs
            .iter()
            .map(|r| {
                vec![
                    r.endpoint_id.to_string(),
                    r.interview_id.to_string(),
                    r.strategy.to_string(),
                    r.calls.to_string(),
                    r.retries.to_string(),
                    r.failure.clone().unwrap_or_default(),
                ]
            })
            .collect();
        arts.csv(
            "run_summary.csv",
            &["endpoint", "interview", "strategy", "calls", "retries", "failure"],
            &rows,
        )?;
        written.extend(arts.finish()?);
    }
    Ok(Outcome { written, warnings })
}

#[derive(Serialize)]
struct SynthReport<'a> {
    config: &'a SynthConfig,
    truths: Vec<LatentTruth<'a>>,
}

#[derive(Serialize)]
struct LatentTruth<'a> {
    interview_id: &'a str,
    values: Vec<&'a str>,
}

fn cmd_synth(a: &SynthArgs) -> Result<Outcome> {
    let mut m = base_manifest("synth", &a.out);
    let taxonomy = load_taxonomy(a.taxonomy.as_deref(), &mut m)?;
    let cfg = match &a.config {
        Some(p) => {
            m.add_input("config", p)?;
            SynthConfig::load(p)?
        }
        None => {
            let c = SynthConfig::experts(a.interviews, a.experts, a.epsilon, a.seed);
            c.validate()?;
            c
        }
    };
    m.seed = cfg.seed;
    m.k = cfg.k;
    m.set("n_interviews", cfg.n_interviews);
    let out = generate(&cfg)?;
    out.panel.validate(&taxonomy)?;
    let corpus = synth_corpus(&cfg, &out.truths, &taxonomy);

    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let panel_path = a.out.join("panel.json");
    out.panel.save(&panel_path)?;
    let interviews_path = a.out.join("interviews.json");
    let mut bytes = serde_json::to_vec_pretty(&corpus)?;
    bytes.push(b'\n');
    std::fs::write(&interviews_path, bytes).map_err(|e| Error::io(&interviews_path, e))?;

    let mut arts = Artifacts::new(&a.out, m)?;
    arts.json(
        "synth.json",
        &SynthReport {
            config: &cfg,
            truths: out
                .truths
                .iter()
                .map(|(i, vs)| LatentTruth {
                    interview_id: i,
                    values: vs.iter().map(|v| v.as_str()).collect(),
                })
                .collect(),
        },
    )?;
    let mut written = vec![panel_path, interviews_path];
    written.extend(arts.finish()?);
    Ok(Outcome {
        written,
        warnings: taxonomy.warnings().to_vec(),
    })
}
