use serde::{Deserialize, Serialize};

use super::{check_lengths, MetricError};

/// In-sample mean absolute error of the one-step naive forecast
/// `y_hat[t] = y[t-1]`.
pub fn naive_scale(train: &[f64]) -> Result<f64, MetricError> {
    if train.len() < 2 {
        return Err(MetricError::Undefined(format!(
            "naive scale needs at least 2 training values, got {}",
            train.len()
        )));
    }
    let scale = train.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (train.len() - 1) as f64;
    if !(scale > 0.0) {
        return Err(MetricError::Undefined(
            "naive scale is zero (constant training series)".into(),
        ));
    }
    Ok(scale)
}

/// Mean absolute scaled error: `mean(|actual - predicted|) / naive_scale`.
pub fn mase(actual: &[f64], predicted: &[f64], naive_scale: f64) -> Result<f64, MetricError> {
    check_lengths(actual.len(), predicted.len())?;
    if actual.is_empty() {
        return Err(MetricError::Empty);
    }
    if !(naive_scale > 0.0 && naive_scale.is_finite()) {
        return Err(MetricError::Undefined(format!("naive scale {naive_scale} is not positive")));
    }
    let mae = actual.iter().zip(predicted).map(|(a, p)| (a - p).abs()).sum::<f64>() / actual.len() as f64;
    Ok(mae / naive_scale)
}

/// MASE restricted to the points that matter for a zero-inflated target.
///
/// `mase_1` covers points with a non-zero actual value; `mase_2` adds the
/// points where occurrence was predicted, exposing the cost of false
/// positives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaseVariants {
    pub mase_1: Option<f64>,
    pub mase_2: Option<f64>,
    pub n_1: usize,
    pub n_2: usize,
    pub absent_reason: Option<String>,
}

pub fn mase_variants(
    actual: &[f64],
    predictions: &[f64],
    predicted_occurrence: &[bool],
    naive_scale: f64,
) -> Result<MaseVariants, MetricError> {
    check_lengths(actual.len(), predictions.len())?;
    check_lengths(actual.len(), predicted_occurrence.len())?;
    let mut set_1 = (Vec::new(), Vec::new());
    let mut set_2 = (Vec::new(), Vec::new());
    for ((&a, &p), &occ) in actual.iter().zip(predictions).zip(predicted_occurrence) {
        if a != 0.0 {
            set_1.0.push(a);
            set_1.1.push(p);
        }
        if a != 0.0 || occ {
            set_2.0.push(a);
            set_2.1.push(p);
        }
    }
    let eval = |(a, p): &(Vec<f64>, Vec<f64>)| -> Result<Option<f64>, MetricError> {
        if a.is_empty() {
            Ok(None)
        } else {
            mase(a, p, naive_scale).map(Some)
        }
    };
    let mase_1 = eval(&set_1)?;
    let mase_2 = eval(&set_2)?;
    let absent_reason = match (mase_1, mase_2) {
        (None, None) => Some("no non-zero actuals and no predicted occurrences".to_string()),
        (None, Some(_)) => Some("no non-zero actuals in the evaluation set".to_string()),
        _ => None,
    };
    Ok(MaseVariants {
        mase_1,
        mase_2,
        n_1: set_1.0.len(),
        n_2: set_2.0.len(),
        absent_reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_derived_scale_and_error() {
        let s = naive_scale(&[0.0, 2.0, 0.0, 4.0]).unwrap();
        assert!((s - 8.0 / 3.0).abs() < 1e-15);
        let m = mase(&[3.0], &[1.5], s).unwrap();
        assert!((m - 0.5625).abs() < 1e-12);
    }

    #[test]
    fn perfect_and_naive_forecasts() {
        assert_eq!(mase(&[1.0, 2.0], &[1.0, 2.0], 1.0).unwrap(), 0.0);
        let train = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0];
        let s = naive_scale(&train).unwrap();
        let m = mase(&train[1..], &train[..train.len() - 1], s).unwrap();
        assert!((m - 1.0).abs() < 1e-15);
    }

    #[test]
    fn undefined_scale() {
        assert!(matches!(naive_scale(&[2.0, 2.0, 2.0]), Err(MetricError::Undefined(_))));
        assert!(naive_scale(&[2.0]).is_err());
        assert!(mase(&[1.0], &[1.0], 0.0).is_err());
    }

    #[test]
    fn subset_rules() {
        let v = mase_variants(&[0.0, 2.0, 0.0], &[1.0, 2.0, 0.0], &[true, true, false], 1.0).unwrap();
        assert_eq!((v.mase_1, v.n_1), (Some(0.0), 1));
        assert_eq!((v.mase_2, v.n_2), (Some(0.5), 2));
        let v = mase_variants(&[0.0, 2.0, 0.0], &[1.0, 3.0, 0.0], &[false; 3], 1.0).unwrap();
        assert_eq!(v.mase_1, v.mase_2);
        let v = mase_variants(&[0.0, 0.0], &[0.0, 1.0], &[false, true], 1.0).unwrap();
        assert_eq!(v.mase_1, None);
        assert!(v.absent_reason.is_some());
    }

    proptest! {
        #[test]
        fn scale_invariant(
            train in prop::collection::vec(0f64..50.0, 3..20),
            pairs in prop::collection::vec((0f64..50.0, 0f64..50.0), 1..20),
            c in 0.01f64..100.0,
        ) {
            let Ok(s) = naive_scale(&train) else { return Ok(()); };
            let (a, p): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let base = mase(&a, &p, s).unwrap();
            let scaled_train: Vec<f64> = train.iter().map(|v| v * c).collect();
            let a2: Vec<f64> = a.iter().map(|v| v * c).collect();
            let p2: Vec<f64> = p.iter().map(|v| v * c).collect();
            let scaled = mase(&a2, &p2, naive_scale(&scaled_train).unwrap()).unwrap();
            prop_assert!((scaled - base).abs() <= 1e-12 * base.max(1e-300));
        }

        #[test]
        fn oracle_occurrence_equalizes(rows in prop::collection::vec((0u8..4, 0f64..5.0), 1..40)) {
            let actual: Vec<f64> = rows.iter().map(|(a, _)| f64::from(*a)).collect();
            let pred: Vec<f64> = rows.iter().map(|(_, p)| *p).collect();
            let occ: Vec<bool> = actual.iter().map(|&a| a != 0.0).collect();
            let v = mase_variants(&actual, &pred, &occ, 1.3).unwrap();
            prop_assert_eq!(v.mase_1, v.mase_2);
            prop_assert_eq!(v.n_1, v.n_2);
        }
    }
}
