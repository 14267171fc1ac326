use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{HarnessError, RunResult};
use crate::hurdle::Scope;
use crate::metrics::{wilcoxon_signed_rank, MetricError};

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricSelector {
    Auc,
    Mase1,
    Mase2,
}

impl MetricSelector {
    pub fn label(self) -> &'static str {
        match self {
            Self::Auc => "AUC ROC",
            Self::Mase1 => "MASE_I",
            Self::Mase2 => "MASE_II",
        }
    }

    pub fn higher_is_better(self) -> bool {
        self == Self::Auc
    }

    pub fn value(self, run: &RunResult) -> Option<f64> {
        match self {
            Self::Auc => run.report.auc_roc,
            Self::Mase1 => run.report.mase_1,
            Self::Mase2 => run.report.mase_2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Significant,
    NotSignificant,
    /// Every paired difference was zero.
    NoEvidence,
    InsufficientRepetitions,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Self::Significant => "significant",
            Self::NotSignificant => "not significant",
            Self::NoEvidence => "no evidence (all paired differences are zero)",
            Self::InsufficientRepetitions => "insufficient repetitions",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// Shared scope of all pairs, if there is one.
    pub scope: Option<Scope>,
    pub model_a: String,
    pub model_b: String,
    pub metric: MetricSelector,
    pub n_pairs: usize,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    /// Model with the better mean metric, when they differ.
    pub better: Option<String>,
    pub verdict: Verdict,
}

impl Comparison {
    pub fn summary_line(&self) -> String {
        let p = self.p_value.map_or("-".to_string(), |p| format!("{p:.3e}"));
        let better = self.better.as_deref().unwrap_or("-");
        let scope = self.scope.map_or("mixed", Scope::label);
        format!(
            "[{scope}] {} vs {} on {}: {} (p = {p}, pairs = {}, better = {better})",
            self.model_a,
            self.model_b,
            self.metric.label(),
            self.verdict.label(),
            self.n_pairs
        )
    }
}

type PairKey = (Scope, String, u32);

fn collect<'a>(results: &'a [RunResult], model: &str) -> BTreeMap<PairKey, &'a RunResult> {
    results
        .iter()
        .filter(|r| r.model_name == model)
        .map(|r| ((r.scope, r.series_id.clone(), r.repetition), r))
        .collect()
}

/// Paired Wilcoxon signed-rank comparison of two models over
/// `(scope, series, repetition)`.
pub fn compare_models(results: &[RunResult], model_a: &str, model_b: &str, metric: MetricSelector) -> Result<Comparison, HarnessError> {
    let a = collect(results, model_a);
    let b = collect(results, model_b);
    if a.is_empty() || b.is_empty() {
        let missing = if a.is_empty() { model_a } else { model_b };
        return Err(HarnessError::Pairing(format!("no results for model `{missing}`")));
    }
    if a.keys().ne(b.keys()) {
        return Err(HarnessError::Pairing(format!(
            "`{model_a}` and `{model_b}` were not run on the same series and repetitions"
        )));
    }
    let mut va = Vec::with_capacity(a.len());
    let mut vb = Vec::with_capacity(a.len());
    for (key, ra) in &a {
        let rb = b[key];
        if ra.predictions.len() != rb.predictions.len()
            || ra.predictions.iter().zip(&rb.predictions).any(|(p, q)| p.timestamp != q.timestamp)
        {
            return Err(HarnessError::Pairing(format!("test timestamps differ for series `{}`", key.1)));
        }
        match (metric.value(ra), metric.value(rb)) {
            (Some(x), Some(y)) => {
                va.push(x);
                vb.push(y);
            }
            _ => {
                return Err(HarnessError::Pairing(format!(
                    "{} missing for series `{}` repetition {}",
                    metric.label(),
                    key.1,
                    key.2
                )))
            }
        }
    }
    let n_pairs = va.len();
    let repetitions: BTreeSet<u32> = a.keys().map(|k| k.2).collect();
    let scopes: BTreeSet<Scope> = a.keys().map(|k| k.0).collect();
    let mut out = Comparison {
        scope: (scopes.len() == 1).then(|| *scopes.iter().next().expect("one scope")),
        model_a: model_a.to_string(),
        model_b: model_b.to_string(),
        metric,
        n_pairs,
        statistic: None,
        p_value: None,
        better: None,
        verdict: Verdict::InsufficientRepetitions,
    };
    if repetitions.len() < 2 {
        return Ok(out);
    }
    let mean_diff = va.iter().zip(&vb).map(|(x, y)| x - y).sum::<f64>() / n_pairs as f64;
    if mean_diff != 0.0 {
        let a_better = (mean_diff > 0.0) == metric.higher_is_better();
        out.better = Some(if a_better { model_a } else { model_b }.to_string());
    }
    match wilcoxon_signed_rank(&va, &vb) {
        Ok(w) => {
            out.statistic = Some(w.statistic);
            out.p_value = Some(w.p_value);
            out.verdict = if w.p_value < SIGNIFICANCE_LEVEL {
                Verdict::Significant
            } else {
                Verdict::NotSignificant
            };
        }
        Err(MetricError::NoEvidence) => out.verdict = Verdict::NoEvidence,
        Err(e) => return Err(e.into()),
    }
    Ok(out)
}
