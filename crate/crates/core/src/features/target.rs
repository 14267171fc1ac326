use super::FeatureError;

/// `log(1 + y)` for non-negative targets.
pub fn transform_target(y: &[f64]) -> Result<Vec<f64>, FeatureError> {
    y.iter()
        .map(|&v| {
            if v >= 0.0 && v.is_finite() {
                Ok(v.ln_1p())
            } else {
                Err(FeatureError::Domain(format!("log1p transform needs finite y >= 0, got {v}")))
            }
        })
        .collect()
}

/// `e^z - 1`, with tiny negative round-off (> -1e-9) clamped to 0.
pub fn inverse_transform_target(z: &[f64]) -> Vec<f64> {
    z.iter()
        .map(|&v| {
            let y = v.exp_m1();
            if y < 0.0 && y > -1e-9 {
                0.0
            } else {
                y
            }
        })
        .collect()
}
