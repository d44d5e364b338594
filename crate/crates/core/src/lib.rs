//! Evaluation toolkit for top-k value annotations of interview transcripts.
//!
//! Expert and model judgments live in a [`panel::PanelMatrix`]. On top of it
//! the crate provides agreement metrics ([`metrics`]), majority-vote ground
//! truth, human ceilings and rank-aggregation ensembles ([`aggregation`]),
//! bootstrap uncertainty-alignment analysis ([`uncertainty`]), synthetic
//! panels with brute-force oracles ([`synth`]) and an LLM annotation harness
//! ([`harness`]).

pub mod aggregation;
pub mod cli;
pub mod error;
pub mod evaluate;
pub mod harness;
pub mod metrics;
pub mod panel;
pub mod ranking;
pub mod synth;
pub mod taxonomy;
pub mod uncertainty;

pub use error::{Error, Result};
pub use panel::{AnnotationRecord, Column, JudgeKind, PanelMatrix};
pub use ranking::{top_k, Ranking, TopKSet, ValueId};
pub use taxonomy::{LoadMode, ValueTaxonomy};
