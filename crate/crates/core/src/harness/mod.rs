//! LLM annotation harness: prompts, segmentation, endpoint calls with
//! retries, response parsing and the run store.

mod endpoint;
mod parse;
mod prompt;
mod run;
mod segment;
mod store;

pub use endpoint::{
    ChatMessage, ChatRequest, Endpoint, EndpointConfig, EndpointsFile, HttpEndpoint,
    TransportError, TransportKind,
};
pub use parse::{
    detect_degenerate, parse_ranking, parse_ranking_detailed, render_ranking, Degeneracy,
    ParseFailure, ParseLayer, ParseMode, Parsed, MIN_PARSED_VALUES, REPEAT_COUNT, REPEAT_UNIT,
};
pub use prompt::{
    build_aggregation_prompt, build_prompt, AggregationInput, PromptStrategy, PromptTemplates,
    Segmentation, Technique, TemplateSet, BUNDLED_TEMPLATES,
};
pub use run::{
    load_interviews, run_batch, run_interview, timestamp, CallOutcome, CallRecord, EndpointJob,
    FailureCategory, Interview, RunContext, RunFailure, RunRecord, Stage, RUN_SCHEMA_VERSION,
};
pub use segment::{
    segment_transcript, sentence_spans, CharHeuristic, Segment, SegmentConfig, TokenEstimator,
    DEFAULT_SEGMENT_BUDGET,
};
pub use store::{append_runs, load_runs, runs_to_panel, write_runs, LoadedRuns};
