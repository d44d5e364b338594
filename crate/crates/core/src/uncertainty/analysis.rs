use serde::{Deserialize, Serialize};

use super::bootstrap::{bootstrap, BootstrapConfig, BootstrapResult};
use super::distribution::{
    alignment_cosine, alignment_spearman, median_per_value_std, value_distribution, Source,
    ValueDistribution, Weighting,
};
use crate::error::{Error, Result};
use crate::panel::{JudgeKind, PanelMatrix};
use crate::taxonomy::ValueTaxonomy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterviewAlignment {
    pub interview_id: String,
    pub source: Source,
    /// `None` for the expert source.
    pub cosine: Option<f64>,
    /// `None` for the expert source or when a std vector has no variance.
    pub spearman: Option<f64>,
    pub median_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceUncertainty {
    pub source: Source,
    pub interviews: usize,
    pub median_std: Option<BootstrapResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cosine: Option<BootstrapResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spearman: Option<BootstrapResult>,
    /// Interviews where rho was undefined (zero-variance std vector).
    pub spearman_undefined: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyReport {
    pub k: usize,
    pub weighting: Weighting,
    pub bootstrap: BootstrapConfig,
    pub values: Vec<String>,
    pub sources: Vec<SourceUncertainty>,
    pub per_interview: Vec<InterviewAlignment>,
    pub warnings: Vec<String>,
}

fn try_bootstrap(
    label: &str,
    stats: &[Option<f64>],
    cfg: &BootstrapConfig,
    warnings: &mut Vec<String>,
) -> Result<Option<BootstrapResult>> {
    match bootstrap(stats, cfg) {
        Ok(r) => Ok(Some(r)),
        Err(Error::Insufficient(why)) => {
            warnings.push(format!("{label}: not bootstrapped ({why})"));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Interview-level alignment of every model with the experts, with
/// bootstrap means and percentile intervals.
pub fn uncertainty_analysis(
    panel: &PanelMatrix,
    taxonomy: &ValueTaxonomy,
    k: usize,
    weighting: Weighting,
    cfg: &BootstrapConfig,
) -> Result<UncertaintyReport> {
    cfg.validate()?;
    if panel.judges_of_kind(JudgeKind::Expert).len() < 2 {
        return Err(Error::Insufficient(
            "uncertainty analysis needs at least 2 experts".into(),
        ));
    }
    let mut warnings = Vec::new();
    let dist = |interview: &str, source: &Source| -> Option<ValueDistribution> {
        value_distribution(panel, interview, source, taxonomy, k, weighting).ok()
    };

    let mut per_interview = Vec::new();
    let mut sources = Vec::new();

    let mut expert_dists = Vec::new();
    for i in panel.interviews() {
        match dist(i, &Source::Experts) {
            Some(d) => expert_dists.push(d),
            None => warnings.push(format!("experts: `{i}` has fewer than 2 judgments, skipped")),
        }
    }
    let expert_medians: Vec<Option<f64>> = expert_dists
        .iter()
        .map(|d| Some(median_per_value_std(d)))
        .collect();
    for d in &expert_dists {
        per_interview.push(InterviewAlignment {
            interview_id: d.interview_id.clone(),
            source: Source::Experts,
            cosine: None,
            spearman: None,
            median_std: median_per_value_std(d),
        });
    }
    sources.push(SourceUncertainty {
        source: Source::Experts,
        interviews: expert_dists.len(),
        median_std: try_bootstrap("experts median std", &expert_medians, cfg, &mut warnings)?,
        cosine: None,
        spearman: None,
        spearman_undefined: 0,
    });

    for model in panel.judges_of_kind(JudgeKind::Model) {
        let source = Source::Model(model.clone());
        let mut cosines = Vec::new();
        let mut rhos = Vec::new();
        let mut medians = Vec::new();
        for e in &expert_dists {
            let Some(m) = dist(&e.interview_id, &source) else {
                warnings.push(format!(
                    "{model}: `{}` has fewer than 2 configurations, skipped",
                    e.interview_id
                ));
                continue;
            };
            let cos = alignment_cosine(&m, e)?;
            let rho = alignment_spearman(&m, e)?.value();
            let med = median_per_value_std(&m);
            cosines.push(Some(cos));
            rhos.push(rho);
            medians.push(Some(med));
            per_interview.push(InterviewAlignment {
                interview_id: e.interview_id.clone(),
                source: source.clone(),
                cosine: Some(cos),
                spearman: rho,
                median_std: med,
            });
        }
        let undefined = rhos.iter().filter(|r| r.is_none()).count();
        if undefined > 0 {
            warnings.push(format!(
                "{model}: Spearman undefined on {undefined} of {} interviews (zero-variance std vector), excluded from its bootstrap",
                rhos.len()
            ));
        }
        sources.push(SourceUncertainty {
            source,
            interviews: cosines.len(),
            median_std: try_bootstrap(&format!("{model} median std"), &medians, cfg, &mut warnings)?,
            cosine: try_bootstrap(&format!("{model} cosine"), &cosines, cfg, &mut warnings)?,
            spearman: try_bootstrap(&format!("{model} spearman"), &rhos, cfg, &mut warnings)?,
            spearman_undefined: undefined,
        });
    }

    Ok(UncertaintyReport {
        k,
        weighting,
        bootstrap: *cfg,
        values: taxonomy.basic_values().iter().map(|v| v.to_string()).collect(),
        sources,
        per_interview,
        warnings,
    })
}
