use serde::{Deserialize, Serialize};

use super::FeatureError;
use crate::matrix::Matrix;

/// Per-column mean and (population) standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerState {
    pub means: Vec<f64>,
    /// Always positive; zero-variance columns carry 1.
    pub stds: Vec<f64>,
}

/// Fits column means and standard deviations. Needs at least two rows.
pub fn fit_scaler(x: &Matrix) -> Result<ScalerState, FeatureError> {
    let n = x.nrows();
    if n < 2 {
        return Err(FeatureError::Input(format!("scaler needs at least 2 rows, got {n}")));
    }
    let cols = x.ncols();
    let mut means = vec![0.0; cols];
    for row in x.rows_iter() {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= n as f64);
    let mut vars = vec![0.0; cols];
    for row in x.rows_iter() {
        for ((s, v), m) in vars.iter_mut().zip(row).zip(&means) {
            *s += (v - m) * (v - m);
        }
    }
    let stds = vars
        .iter()
        .zip(&means)
        .map(|(s, m)| {
            let sd = (s / n as f64).sqrt();
            // near-constant columns pass through centered
            if sd.is_finite() && sd > 1e-10 * m.abs().max(1.0) {
                sd
            } else {
                1.0
            }
        })
        .collect();
    Ok(ScalerState { means, stds })
}

pub fn apply_scaler(state: &ScalerState, x: &Matrix) -> Result<Matrix, FeatureError> {
    if x.ncols() != state.means.len() {
        return Err(FeatureError::ColumnMismatch {
            expected: state.means.len(),
            actual: x.ncols(),
        });
    }
    let mut out = x.clone();
    for i in 0..out.nrows() {
        for ((v, m), s) in out.row_mut(i).iter_mut().zip(&state.means).zip(&state.stds) {
            *v = (*v - m) / s;
        }
    }
    Ok(out)
}

/// Stateful wrapper that refuses to transform before `fit`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StandardScaler {
    state: Option<ScalerState>,
}

impl StandardScaler {
    pub fn fit(&mut self, x: &Matrix) -> Result<&ScalerState, FeatureError> {
        Ok(self.state.insert(fit_scaler(x)?))
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix, FeatureError> {
        apply_scaler(self.state.as_ref().ok_or(FeatureError::NotFitted)?, x)
    }

    pub fn fit_transform(&mut self, x: &Matrix) -> Result<Matrix, FeatureError> {
        self.fit(x)?;
        self.transform(x)
    }

    pub fn state(&self) -> Option<&ScalerState> {
        self.state.as_ref()
    }
}
