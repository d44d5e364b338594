//! Ground truth, human ceiling, rank aggregation and ensemble evaluation.

mod ensemble;
mod ground_truth;
mod tie;
mod voting;

pub use ensemble::{
    combinations, leave_one_model_out, Combination, DeltaReport, DeltaRow, EnsembleConfig,
    InterviewEnsemble,
};
pub use ground_truth::{
    build_ground_truth, human_ceiling, vote_top_k, CeilingReport, Completeness, GroundTruth,
    GroundTruthSet, JudgeCeiling,
};
pub use tie::{mean_ranks, order_by_score, tie_cmp, TieBreak, TieEvent, TiePolicy};
pub use voting::{
    aggregate, aggregate_borda, aggregate_kemeny, aggregate_majority, borda_scores, kendall_cost,
    preference_matrix, Aggregate, Method, MAX_KEMENY_VALUES,
};

use serde::{Deserialize, Serialize};

/// Mean and population standard deviation of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl MetricSummary {
    pub fn of(xs: &[f64]) -> Self {
        MetricSummary {
            mean: crate::metrics::mean(xs).unwrap_or(f64::NAN),
            std: crate::metrics::population_std(xs).unwrap_or(f64::NAN),
            n: xs.len(),
        }
    }
}
