//! Evaluation metrics for zero-inflated predictions.

mod auc;
mod classification;
mod cost;
mod mase;
mod report;
mod wilcoxon;

pub use auc::{attribute_classes, auc_roc, Attribution, AucStrategy};
pub use classification::{confusion_metrics, confusion_metrics_with_labels, ClassMetrics, ClassificationReport, ConfusionSummary};
pub use cost::{tec, CostModel, TecEstimate, A100_FP64_FLOPS_PER_WATT};
pub use mase::{mase, mase_variants, naive_scale, MaseVariants};
pub use report::EvaluationReport;
pub use wilcoxon::{wilcoxon_signed_rank, WilcoxonResult, EXACT_MAX_N};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("labels contain a single class; both classes are required")]
    SingleClass,
    #[error("empty input")]
    Empty,
    #[error("non-finite value in input")]
    NonFinite,
    #[error("metric undefined: {0}")]
    Undefined(String),
    #[error("no evidence: every paired difference is zero")]
    NoEvidence,
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub(crate) fn check_lengths(left: usize, right: usize) -> Result<(), MetricError> {
    if left != right {
        return Err(MetricError::LengthMismatch { left, right });
    }
    Ok(())
}

/// Midranks (1-based, ties averaged) of `values`.
pub(crate) fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j share the average of ranks i+1..=j+1
        let rank = (i + j + 2) as f64 / 2.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}
