use serde::{Deserialize, Serialize};

use super::distribution::{indicator, Source, Weighting};
use crate::error::{Error, Result};
use crate::metrics::population_std;
use crate::panel::PanelMatrix;
use crate::taxonomy::ValueTaxonomy;

/// Corpus-wide assignment totals of one source member (an expert, or a
/// model under one configuration).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberTotals {
    pub member: String,
    pub interviews: usize,
    pub totals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceGlobal {
    pub source: Source,
    pub members: Vec<MemberTotals>,
    /// Per-value mean of member totals.
    pub mean: Vec<f64>,
    /// Per-value population std of member totals.
    pub std: Vec<f64>,
    /// `(interview, member)` pairs with no judgment.
    pub missing: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalDistribution {
    pub k: usize,
    pub weighting: Weighting,
    pub values: Vec<String>,
    pub sources: Vec<SourceGlobal>,
}

impl GlobalDistribution {
    pub fn source(&self, source: &Source) -> Option<&SourceGlobal> {
        self.sources.iter().find(|s| &s.source == source)
    }
}

/// Sums each member's assignments over all interviews, then summarizes
/// members per source.
pub fn global_distribution(
    panel: &PanelMatrix,
    taxonomy: &ValueTaxonomy,
    sources: &[Source],
    k: usize,
    weighting: Weighting,
) -> Result<GlobalDistribution> {
    if panel.is_empty() {
        return Err(Error::Empty("panel"));
    }
    let dims = taxonomy.basic_values().len();
    let mut out = Vec::new();
    for source in sources {
        let columns = source.columns(panel);
        if columns.is_empty() {
            return Err(Error::Panel(format!("source {source} has no judgments")));
        }
        let mut members = Vec::new();
        let mut missing = Vec::new();
        for col in &columns {
            let mut totals = vec![0.0; dims];
            let mut seen = 0;
            for i in panel.interviews() {
                match panel.get(i, col) {
                    Some(r) => {
                        seen += 1;
                        for (t, x) in totals.iter_mut().zip(indicator(r, taxonomy, k, weighting)?.0) {
                            *t += x;
                        }
                    }
                    None => missing.push((i.clone(), col.to_string())),
                }
            }
            members.push(MemberTotals {
                member: col.to_string(),
                interviews: seen,
                totals,
            });
        }
        let mut mean = Vec::with_capacity(dims);
        let mut std = Vec::with_capacity(dims);
        for d in 0..dims {
            let xs: Vec<f64> = members.iter().map(|m| m.totals[d]).collect();
            mean.push(crate::metrics::mean(&xs).unwrap());
            std.push(population_std(&xs).unwrap());
        }
        out.push(SourceGlobal {
            source: source.clone(),
            members,
            mean,
            std,
            missing,
        });
    }
    Ok(GlobalDistribution {
        k,
        weighting,
        values: taxonomy.basic_values().iter().map(|v| v.to_string()).collect(),
        sources: out,
    })
}
