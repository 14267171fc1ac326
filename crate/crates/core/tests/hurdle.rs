use proptest::prelude::*;

use twofold::hurdle::{fit_hurdle_with, gate, predict_hurdle, select_threshold, HurdleOptions};
use twofold::learners::{LearnerConfig, Task};
use twofold::metrics::ConfusionSummary;
use twofold::Matrix;

/// Youden J at every distinct score by direct confusion counts; the
/// largest score among the maxima.
fn brute_force_threshold(scores: &[f64], labels: &[bool]) -> (f64, f64) {
    let mut cuts = scores.to_vec();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut best = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &c in &cuts {
        let predicted: Vec<bool> = scores.iter().map(|&s| s >= c).collect();
        let j = ConfusionSummary::from_binary(&predicted, labels).youden_j();
        if j >= best.1 - 1e-12 {
            best = (c, j.max(best.1));
        }
    }
    best
}

fn scored_labels() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    prop::collection::vec((0u8..12, any::<bool>()), 2..80)
        .prop_filter("both classes", |v| v.iter().any(|p| p.1) && v.iter().any(|p| !p.1))
        .prop_map(|v| v.into_iter().map(|(s, l)| (f64::from(s) / 11.0, l)).unzip())
}

fn hurdle_data(n: usize, seed: u64) -> (Matrix, Vec<f64>) {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut rows = Vec::with_capacity(n * 3);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b, c) = (next() * 4.0, next() * 2.0 - 1.0, next());
        rows.extend([a, b, c]);
        let active = a > 1.5 || i % 7 == 0;
        y.push(if active { (1.0 + a + 2.0 * c).round() } else { 0.0 });
    }
    (Matrix::from_vec(n, 3, rows).unwrap(), y)
}

proptest! {
    #[test]
    fn threshold_maximizes_youden_j((scores, labels) in scored_labels()) {
        let sel = select_threshold(&scores, &labels).unwrap();
        let (t, j) = brute_force_threshold(&scores, &labels);
        prop_assert!((sel.youden_j - j).abs() < 1e-12, "{} vs {}", sel.youden_j, j);
        prop_assert_eq!(sel.threshold, t);
    }

    #[test]
    fn gate_passes_values_only_above_threshold(
        rows in prop::collection::vec((0f64..1.0, 0f64..50.0), 0..100),
        threshold in 0f64..1.0,
    ) {
        let (prob, values): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
        let combined = gate(&prob, &values, threshold);
        for i in 0..prob.len() {
            if combined[i] != 0.0 {
                prop_assert!(prob[i] >= threshold);
            }
            let expected = if prob[i] >= threshold { values[i] } else { 0.0 };
            prop_assert_eq!(combined[i], expected);
        }
    }

    #[test]
    fn conditional_stage_ignores_zero_rows(seed in any::<u64>(), shift in prop::collection::vec(-100f64..100.0, 3)) {
        let (x, y) = hurdle_data(120, seed);
        let opts = HurdleOptions::default();
        let classifier = LearnerConfig::logistic();
        for conditional in [LearnerConfig::linear(), LearnerConfig::hgb(Task::Regression)] {
            let base = fit_hurdle_with(&classifier, &conditional, &x, &x, &y, &opts).unwrap();
            let mut perturbed = x.clone();
            for i in (0..y.len()).filter(|&i| y[i] == 0.0) {
                for (f, s) in shift.iter().enumerate() {
                    perturbed.set(i, f, x.get(i, f) + s);
                }
            }
            let moved = fit_hurdle_with(&classifier, &conditional, &x, &perturbed, &y, &opts).unwrap();
            prop_assert_eq!(&base.conditional_model, &moved.conditional_model);
            prop_assert_eq!(moved.n_conditional_rows, y.iter().filter(|&&v| v != 0.0).count());
        }
    }
}

#[test]
fn predictions_are_non_negative_and_gated() {
    let (x, y) = hurdle_data(300, 11);
    let model = fit_hurdle_with(&LearnerConfig::logistic(), &LearnerConfig::linear(), &x, &x, &y, &HurdleOptions::default()).unwrap();
    let out = predict_hurdle(&model, &x).unwrap();
    for (p, c) in out.occurrence_prob.iter().zip(&out.combined) {
        assert!(*c >= 0.0);
        if *p < model.threshold {
            assert_eq!(*c, 0.0);
        }
    }
    assert!(out.combined.iter().any(|&c| c > 0.0));
}
