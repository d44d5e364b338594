//! The `valign` command line: one subcommand per analysis.

mod commands;
pub mod manifest;
pub mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use manifest::{InputFile, RunManifest};
pub use output::Artifacts;

#[derive(Debug, Parser)]
#[command(name = "valign", version, about = "Agreement and alignment analysis for top-k value annotations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score model judgments against the expert majority vote.
    Evaluate(EvaluateArgs),
    /// Leave-one-expert-out agreement of each expert with the others.
    Ceiling(AnalysisArgs),
    /// Leave-one-model-out rank-aggregation ensembles.
    Ensemble(EnsembleArgs),
    /// Per-interview uncertainty alignment with bootstrap intervals.
    Uncertainty(DistributionArgs),
    /// Corpus-wide value distributions, as tables and a bar chart.
    Global(DistributionArgs),
    /// Annotate transcripts with chat-completion endpoints.
    Run(RunArgs),
    /// Generate a synthetic panel and matching transcripts.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct AnalysisArgs {
    /// Taxonomy file (TOML or JSON); the bundled taxonomy when omitted.
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    /// Panel file (`.json` or `.csv`).
    #[arg(long)]
    pub panel: Option<PathBuf>,
    /// Run store(s) whose parsed rankings join the panel as model judgments.
    #[arg(long, num_args = 1..)]
    pub runs: Vec<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 0.9)]
    pub rbo_p: f64,
    /// jaccard, masi or nominal.
    #[arg(long, default_value = "jaccard")]
    pub alpha_distance: String,
    /// mean-rank-then-lexicographic or lexicographic.
    #[arg(long, default_value = "mean-rank-then-lexicographic")]
    pub tie_policy: String,
    #[arg(long, default_value_t = 10_000)]
    pub bootstrap_b: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fail on short rankings and missing cells (default).
    #[arg(long, conflicts_with = "lenient")]
    pub strict: bool,
    /// Clip short rankings and skip missing cells, with warnings.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: AnalysisArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EnsembleArgs {
    #[command(flatten)]
    pub common: AnalysisArgs,
    /// kemeny, majority, borda or all.
    #[arg(long, default_value = "all")]
    pub method: String,
    /// `all`, `best` (highest mean F1 across models) or a comma list.
    #[arg(long, default_value = "all")]
    pub configs: String,
}

#[derive(Debug, Clone, Args)]
pub struct DistributionArgs {
    #[command(flatten)]
    pub common: AnalysisArgs,
    /// binary or rank-weighted.
    #[arg(long, default_value = "binary")]
    pub weighting: String,
    #[arg(long, default_value_t = 0.95)]
    pub confidence: f64,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Endpoint list (TOML or JSON).
    #[arg(long)]
    pub endpoints: PathBuf,
    /// Interviews as a JSON array of `{id, transcript, profile}`.
    #[arg(long)]
    pub interviews: PathBuf,
    /// `grid` for all eight configurations, or a comma list such as `baseline-W,bc+pep-S`.
    #[arg(long, default_value = "grid")]
    pub strategies: String,
    /// Run store to write (JSON lines).
    #[arg(long)]
    pub runs: PathBuf,
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    /// Prompt template file; the bundled templates when omitted.
    #[arg(long)]
    pub templates: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5000)]
    pub segment_budget: usize,
    /// Split oversized sentences at word boundaries instead of failing.
    #[arg(long)]
    pub word_fallback: bool,
    /// rankings or text.
    #[arg(long, default_value = "rankings")]
    pub aggregation_input: String,
    /// Keep the existing store and only run cells without a successful record.
    #[arg(long)]
    pub resume: bool,
    /// Directory for a run summary.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Generator configuration (TOML or JSON); overrides the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 12)]
    pub interviews: usize,
    #[arg(long, default_value_t = 6)]
    pub experts: usize,
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses arguments, runs the subcommand and reports errors on stderr.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::execute(&cli.command) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for p in &outcome.written {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

/// What a subcommand produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

pub use commands::execute;
