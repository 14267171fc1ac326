use proptest::prelude::*;

use twofold::metrics::{auc_roc, mase_variants, tec, wilcoxon_signed_rank, CostModel};

fn scored_labels() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    prop::collection::vec((0i32..15, any::<bool>()), 2..60)
        .prop_filter("both classes", |v| v.iter().any(|p| p.1) && v.iter().any(|p| !p.1))
        .prop_map(|v| v.into_iter().map(|(s, l)| (f64::from(s), l)).unzip())
}

proptest! {
    #[test]
    fn auc_is_invariant_under_increasing_maps((scores, labels) in scored_labels(), a in 0.5f64..4.0, b in -3f64..3.0) {
        let base = auc_roc(&scores, &labels).unwrap();
        let cubed: Vec<f64> = scores.iter().map(|s| s * s * s).collect();
        let affine: Vec<f64> = scores.iter().map(|s| a * s + b).collect();
        prop_assert!((auc_roc(&cubed, &labels).unwrap() - base).abs() < 1e-12);
        prop_assert!((auc_roc(&affine, &labels).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn auc_of_swapped_labels_is_complement((scores, labels) in scored_labels()) {
        let flipped: Vec<bool> = labels.iter().map(|l| !l).collect();
        let sum = auc_roc(&scores, &labels).unwrap() + auc_roc(&scores, &flipped).unwrap();
        prop_assert!((sum - 1.0).abs() < 1e-12, "{}", sum);
    }

    #[test]
    fn wilcoxon_p_in_unit_interval(pairs in prop::collection::vec((0i32..8, 0i32..8), 1..45)) {
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.iter().map(|&(x, y)| (f64::from(x), f64::from(y))).unzip();
        match wilcoxon_signed_rank(&a, &b) {
            Ok(r) => {
                prop_assert!(r.p_value > 0.0 && r.p_value <= 1.0, "{}", r.p_value);
                prop_assert!((r.w_plus + r.w_minus - (r.n * (r.n + 1)) as f64 / 2.0).abs() < 1e-9);
                let swapped = wilcoxon_signed_rank(&b, &a).unwrap();
                prop_assert!((swapped.p_value - r.p_value).abs() < 1e-12);
            }
            Err(_) => prop_assert!(a == b),
        }
    }

    #[test]
    fn second_subset_contains_first(
        rows in prop::collection::vec((0u8..4, 0f64..5.0, any::<bool>()), 1..80),
        scale in 0.1f64..5.0,
    ) {
        let actual: Vec<f64> = rows.iter().map(|r| f64::from(r.0)).collect();
        let pred: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let occ: Vec<bool> = rows.iter().map(|r| r.2).collect();
        let v = mase_variants(&actual, &pred, &occ, scale).unwrap();
        prop_assert!(v.n_2 >= v.n_1);
        prop_assert_eq!(v.n_1, actual.iter().filter(|&&a| a != 0.0).count());
        prop_assert_eq!(v.mase_1.is_some(), v.n_1 > 0);
        prop_assert_eq!(v.mase_2.is_some(), v.n_2 > 0);
    }

    #[test]
    fn tec_is_linear_in_workload(flops in 1f64..1e12, efficiency in 1e6f64..1e11, n in 0u64..10_000_000, k in 1u64..50) {
        let one = tec(&CostModel { flops_per_prediction: flops, flops_per_watt: efficiency, n_predictions: n }).unwrap();
        let many = tec(&CostModel { flops_per_prediction: flops, flops_per_watt: efficiency, n_predictions: n * k }).unwrap();
        prop_assert!((one.joules_per_prediction - flops / efficiency).abs() <= 1e-12 * one.joules_per_prediction);
        prop_assert!((many.total_joules - k as f64 * one.total_joules).abs() <= 1e-9 * many.total_joules.max(1e-300));
        let doubled = tec(&CostModel { flops_per_prediction: 2.0 * flops, flops_per_watt: efficiency, n_predictions: n }).unwrap();
        prop_assert!((doubled.total_joules - 2.0 * one.total_joules).abs() <= 1e-9 * doubled.total_joules.max(1e-300));
    }
}

#[test]
fn tec_rejects_non_positive_inputs() {
    for (f, e) in [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (f64::NAN, 1.0)] {
        assert!(tec(&CostModel { flops_per_prediction: f, flops_per_watt: e, n_predictions: 1 }).is_err());
    }
}
