//! Synthetic panels with controllable disagreement, synthetic transcripts,
//! and brute-force oracles.

mod corpus;
mod generate;
mod oracle;

pub use corpus::{cue_phrases, synth_corpus};
pub use generate::{generate, generate_panel, JudgeGroup, SynthConfig, SynthOutput};
pub use oracle::{
    oracle_alpha, oracle_kemeny, oracle_rbo_infinite, oracle_rbo_terms, MAX_ORACLE_KEMENY_VALUES,
};
