use serde::{Deserialize, Serialize};

use super::{check_lengths, midranks, MetricError};

/// Rule turning a regressor's numeric output into a binary occurrence signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Attribution {
    /// Occurrence iff prediction >= 1.
    Floor,
    /// Occurrence iff prediction > 0.5.
    Round,
    /// Occurrence iff prediction > 0.
    Ceil,
}

impl Attribution {
    pub const ALL: [Attribution; 3] = [Attribution::Floor, Attribution::Round, Attribution::Ceil];

    #[inline]
    pub fn occurs(self, prediction: f64) -> bool {
        match self {
            Attribution::Floor => prediction >= 1.0,
            Attribution::Round => prediction > 0.5,
            Attribution::Ceil => prediction > 0.0,
        }
    }
}

/// Which scores fed an AUC value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AucStrategy {
    /// Raw classifier probabilities.
    Probability,
    Floor,
    Round,
    Ceil,
}

impl AucStrategy {
    pub fn label(self) -> &'static str {
        match self {
            AucStrategy::Probability => "prob",
            AucStrategy::Floor => "floor",
            AucStrategy::Round => "round",
            AucStrategy::Ceil => "ceil",
        }
    }

    /// Scores to rank under this strategy.
    pub fn scores(self, predictions: &[f64]) -> Vec<f64> {
        match self {
            AucStrategy::Probability => predictions.to_vec(),
            AucStrategy::Floor => attribute_classes(predictions, Attribution::Floor),
            AucStrategy::Round => attribute_classes(predictions, Attribution::Round),
            AucStrategy::Ceil => attribute_classes(predictions, Attribution::Ceil),
        }
    }
}

impl From<Attribution> for AucStrategy {
    fn from(a: Attribution) -> Self {
        match a {
            Attribution::Floor => AucStrategy::Floor,
            Attribution::Round => AucStrategy::Round,
            Attribution::Ceil => AucStrategy::Ceil,
        }
    }
}

/// 0/1 occurrence scores under `strategy`.
pub fn attribute_classes(predictions: &[f64], strategy: Attribution) -> Vec<f64> {
    predictions
        .iter()
        .map(|&p| if strategy.occurs(p) { 1.0 } else { 0.0 })
        .collect()
}

/// Area under the ROC curve via the Mann-Whitney rank sum with midranks:
/// P(score+ > score-) + P(tie) / 2.
pub fn auc_roc(scores: &[f64], labels: &[bool]) -> Result<f64, MetricError> {
    check_lengths(scores.len(), labels.len())?;
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(MetricError::NonFinite);
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(MetricError::SingleClass);
    }
    let ranks = midranks(scores);
    let rank_sum: f64 = ranks.iter().zip(labels).filter(|(_, &l)| l).map(|(r, _)| r).sum();
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}
