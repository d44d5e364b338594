//! Per-value uncertainty of models versus experts.

mod analysis;
mod bootstrap;
mod chart;
mod distribution;
mod global;

pub use analysis::{uncertainty_analysis, InterviewAlignment, SourceUncertainty, UncertaintyReport};
pub use bootstrap::{bootstrap, BootstrapConfig, BootstrapResult};
pub use chart::render_global_chart;
pub use distribution::{
    alignment_cosine, alignment_spearman, indicator, median, median_per_value_std,
    value_distribution, Source, ValueDistribution, Weighting,
};
pub use global::{global_distribution, GlobalDistribution, MemberTotals, SourceGlobal};
