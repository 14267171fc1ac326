use serde::{Deserialize, Serialize};

use super::{AucStrategy, ClassificationReport};

/// Evaluation of one model on one test set.
///
/// `auc_roc` is the best value over the strategies in `auc_by_strategy`;
/// `auc_strategy` names the one that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub auc_roc: Option<f64>,
    pub auc_strategy: AucStrategy,
    pub auc_by_strategy: Vec<(AucStrategy, Option<f64>)>,
    pub mase_1: Option<f64>,
    pub mase_2: Option<f64>,
    pub n_eval_points_1: usize,
    pub n_eval_points_2: usize,
    pub naive_scale: f64,
    /// Occurrence classification at the decision threshold, when applicable.
    pub classification: Option<ClassificationReport>,
    /// Reasons for absent metrics and other provenance.
    pub notes: Vec<String>,
}

impl EvaluationReport {
    pub fn auc_for(&self, strategy: AucStrategy) -> Option<f64> {
        self.auc_by_strategy.iter().find(|(s, _)| *s == strategy).and_then(|(_, v)| *v)
    }
}
