use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// Binary confusion counts with sensitivity and specificity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionSummary {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    pub sensitivity: f64,
    pub specificity: f64,
}

impl ConfusionSummary {
    /// Zero-denominator rates are reported as 0.
    pub fn from_binary(predicted: &[bool], truth: &[bool]) -> Self {
        let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
        for (&p, &t) in predicted.iter().zip(truth) {
            match (p, t) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, false) => tn += 1,
                (false, true) => fn_ += 1,
            }
        }
        Self {
            tp,
            fp,
            tn,
            fn_,
            sensitivity: ratio(tp, tp + fn_),
            specificity: ratio(tn, tn + fp),
        }
    }

    pub fn youden_j(&self) -> f64 {
        self.sensitivity + self.specificity - 1.0
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Per-class precision, recall and F1 plus support-weighted averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub per_class: Vec<ClassMetrics>,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
}

impl ClassificationReport {
    pub fn class(&self, label: usize) -> Option<&ClassMetrics> {
        self.per_class.iter().find(|c| c.label == label)
    }
}

/// Metrics over the labels appearing in either vector.
pub fn confusion_metrics(predicted: &[usize], truth: &[usize]) -> ClassificationReport {
    let labels: BTreeSet<usize> = predicted.iter().chain(truth).copied().collect();
    confusion_metrics_with_labels(predicted, truth, &labels.into_iter().collect::<Vec<_>>())
}

/// Metrics over an explicit label set. Undefined precision or recall is 0;
/// labels with no support get weight 0 in the averages.
pub fn confusion_metrics_with_labels(predicted: &[usize], truth: &[usize], labels: &[usize]) -> ClassificationReport {
    let per_class: Vec<ClassMetrics> = labels
        .iter()
        .map(|&label| {
            let (mut tp, mut fp, mut fn_) = (0, 0, 0);
            for (&p, &t) in predicted.iter().zip(truth) {
                match (p == label, t == label) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, true) => fn_ += 1,
                    _ => {}
                }
            }
            let precision = ratio(tp, tp + fp);
            let recall = ratio(tp, tp + fn_);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ClassMetrics {
                label,
                precision,
                recall,
                f1,
                support: tp + fn_,
            }
        })
        .collect();
    let total: usize = per_class.iter().map(|c| c.support).sum();
    let weighted = |f: fn(&ClassMetrics) -> f64| {
        if total == 0 {
            0.0
        } else {
            per_class.iter().map(|c| f(c) * c.support as f64).sum::<f64>() / total as f64
        }
    };
    ClassificationReport {
        weighted_precision: weighted(|c| c.precision),
        weighted_recall: weighted(|c| c.recall),
        weighted_f1: weighted(|c| c.f1),
        per_class,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect() {
        let r = confusion_metrics(&[0, 1, 2, 1], &[0, 1, 2, 1]);
        assert_eq!((r.weighted_precision, r.weighted_recall, r.weighted_f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn hand_computed_class() {
        // class 0 ("A"): tp=1, fp=1, fn=3
        let truth = [0, 0, 0, 0, 1, 1];
        let pred = [0, 1, 1, 1, 0, 1];
        let r = confusion_metrics(&pred, &truth);
        let a = r.class(0).unwrap();
        assert_eq!((a.precision, a.recall), (0.5, 0.25));
        assert!((a.f1 - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(a.support, 4);
    }

    #[test]
    fn absent_label_has_no_weight() {
        let with = confusion_metrics_with_labels(&[0, 1], &[0, 0], &[0, 1, 7]);
        let without = confusion_metrics(&[0, 1], &[0, 0]);
        assert_eq!(with.class(7).unwrap().support, 0);
        assert_eq!(with.weighted_f1, without.weighted_f1);
    }

    #[test]
    fn binary_summary() {
        let s = ConfusionSummary::from_binary(&[true, true, false, false], &[true, false, false, true]);
        assert_eq!((s.tp, s.fp, s.tn, s.fn_), (1, 1, 1, 1));
        assert_eq!(s.youden_j(), 0.0);
    }
}
