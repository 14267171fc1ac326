use serde::{Deserialize, Serialize};

use super::HurdleError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSelection {
    pub threshold: f64,
    /// Youden index `sensitivity + specificity - 1` at `threshold`.
    pub youden_j: f64,
    /// One point per distinct score, by decreasing threshold.
    pub roc_points: Vec<RocPoint>,
}

/// Picks the cut maximizing the Youden index.
///
/// Every distinct score `s` is a candidate: rows with `score >= s` are
/// predicted positive. Among equal J the larger threshold wins.
pub fn select_threshold(scores: &[f64], labels: &[bool]) -> Result<ThresholdSelection, HurdleError> {
    if scores.len() != labels.len() {
        return Err(HurdleError::Input(format!("{} scores for {} labels", scores.len(), labels.len())));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(HurdleError::Input("non-finite score".into()));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(HurdleError::DegenerateClass(
            if positives == 0 { "no positive labels" } else { "no negative labels" }.into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let (mut tp, mut fp) = (0usize, 0usize);
    let mut roc_points = Vec::new();
    // J scaled by positives * negatives is an exact integer, so equal J compare equal
    let mut best: (i128, f64, f64) = (i128::MIN, 0.0, 0.0);
    let mut i = 0;
    while i < order.len() {
        let cut = scores[order[i]];
        while i < order.len() && scores[order[i]] == cut {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let tpr = tp as f64 / positives as f64;
        let fpr = fp as f64 / negatives as f64;
        let key = tp as i128 * negatives as i128 - fp as i128 * positives as i128;
        // cuts arrive in decreasing order, so strict improvement keeps the larger one on ties
        if key > best.0 {
            best = (key, tpr - fpr, cut);
        }
        roc_points.push(RocPoint { fpr, tpr, threshold: cut });
    }
    Ok(ThresholdSelection {
        threshold: best.2,
        youden_j: best.1,
        roc_points,
    })
}
