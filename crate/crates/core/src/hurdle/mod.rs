//! Two-fold models: an occurrence classifier gating a conditional model
//! trained only on non-zero rows.

mod threshold;

pub use threshold::{select_threshold, RocPoint, ThresholdSelection};

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::TimeSeriesDataset;
use crate::features::{inverse_transform_target, transform_target, FeatureError};
use crate::learners::{Fit, FittedModel, LearnerError, MulticlassModel};
use crate::matrix::Matrix;
use crate::par::{self, Execution};

#[derive(Debug, Error)]
pub enum HurdleError {
    #[error("degenerate training data: {0}")]
    DegenerateClass(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("feature schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("unknown series `{0}`")]
    UnknownSeries(String),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HurdleMode {
    /// The second stage regresses the non-zero value.
    #[default]
    Regression,
    /// The second stage picks a class among the non-zero labels.
    Classification,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    #[default]
    Local,
    Global,
}

impl Scope {
    pub fn label(self) -> &'static str {
        match self {
            Self::Local => "local",
            Self::Global => "global",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConditionalModel {
    Regressor(FittedModel),
    Classifier(MulticlassModel),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HurdleOptions {
    pub mode: HurdleMode,
    /// Fit the regressor on `log(1 + y)` and invert its predictions.
    pub transform_target: bool,
    pub scope: Scope,
}

impl Default for HurdleOptions {
    fn default() -> Self {
        Self {
            mode: HurdleMode::Regression,
            transform_target: true,
            scope: Scope::Local,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurdleModel {
    pub occurrence_classifier: FittedModel,
    pub conditional_model: ConditionalModel,
    pub threshold: f64,
    pub youden_j: f64,
    /// Split the threshold was selected on.
    pub threshold_source: String,
    pub target_transform_enabled: bool,
    pub mode: HurdleMode,
    pub scope: Scope,
    pub n_training_rows: usize,
    pub n_conditional_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurdleOutput {
    pub occurrence_prob: Vec<f64>,
    /// 0 where the gate is closed; otherwise the conditional value (or
    /// class label in classification mode).
    pub combined: Vec<f64>,
}

pub fn fit_hurdle(
    classifier: &dyn Fit,
    conditional: &dyn Fit,
    ds: &TimeSeriesDataset,
    mode: HurdleMode,
) -> Result<HurdleModel, HurdleError> {
    let opts = HurdleOptions {
        mode,
        ..HurdleOptions::default()
    };
    fit_hurdle_with(classifier, conditional, ds.features(), ds.features(), ds.targets(), &opts)
}

/// Fits a two-fold model where each stage may see its own feature table.
/// Both tables must have one row per target. In classification mode the
/// targets are class labels with 0 meaning "no activity".
pub fn fit_hurdle_with(
    classifier: &dyn Fit,
    conditional: &dyn Fit,
    x_occurrence: &Matrix,
    x_conditional: &Matrix,
    y: &[f64],
    opts: &HurdleOptions,
) -> Result<HurdleModel, HurdleError> {
    let n = y.len();
    if x_occurrence.nrows() != n || x_conditional.nrows() != n {
        return Err(HurdleError::Input(format!(
            "{} targets, {} occurrence rows, {} conditional rows",
            n,
            x_occurrence.nrows(),
            x_conditional.nrows()
        )));
    }
    let labels: Vec<bool> = y.iter().map(|&v| v != 0.0).collect();
    let nonzero: Vec<usize> = (0..n).filter(|&i| labels[i]).collect();
    if nonzero.is_empty() {
        return Err(HurdleError::DegenerateClass("all targets are zero (no non-zero class)".into()));
    }
    if nonzero.len() == n {
        return Err(HurdleError::DegenerateClass("all targets are non-zero (no zero class)".into()));
    }

    let occ_y: Vec<f64> = labels.iter().map(|&l| f64::from(u8::from(l))).collect();
    let occurrence_classifier = classifier.fit_model(x_occurrence, &occ_y, None)?;
    let scores = occurrence_classifier.predict(x_occurrence)?;
    let selection = select_threshold(&scores, &labels)?;

    let x_nz = x_conditional.select_rows(&nonzero);
    let y_nz: Vec<f64> = nonzero.iter().map(|&i| y[i]).collect();
    let conditional_model = match opts.mode {
        HurdleMode::Regression => {
            let target = if opts.transform_target {
                transform_target(&y_nz)?
            } else {
                y_nz
            };
            ConditionalModel::Regressor(conditional.fit_model(&x_nz, &target, None)?)
        }
        HurdleMode::Classification => {
            if y_nz.iter().any(|v| v.fract() != 0.0 || *v < 0.0) {
                return Err(HurdleError::Input("class labels must be non-negative integers".into()));
            }
            let classes: Vec<usize> = y_nz.iter().map(|&v| v as usize).collect();
            ConditionalModel::Classifier(conditional.fit_multiclass(&x_nz, &classes)?)
        }
    };
    Ok(HurdleModel {
        occurrence_classifier,
        conditional_model,
        threshold: selection.threshold,
        youden_j: selection.youden_j,
        threshold_source: "training".into(),
        target_transform_enabled: opts.transform_target && opts.mode == HurdleMode::Regression,
        mode: opts.mode,
        scope: opts.scope,
        n_training_rows: n,
        n_conditional_rows: nonzero.len(),
    })
}

pub fn predict_hurdle(model: &HurdleModel, x: &Matrix) -> Result<HurdleOutput, HurdleError> {
    predict_hurdle_with(model, x, x)
}

pub fn predict_hurdle_with(model: &HurdleModel, x_occurrence: &Matrix, x_conditional: &Matrix) -> Result<HurdleOutput, HurdleError> {
    if x_occurrence.nrows() != x_conditional.nrows() {
        return Err(HurdleError::Input("stage feature tables differ in row count".into()));
    }
    let occurrence_prob = model.occurrence_classifier.predict(x_occurrence)?;
    let values = conditional_values(model, x_conditional)?;
    Ok(HurdleOutput {
        combined: gate(&occurrence_prob, &values, model.threshold),
        occurrence_prob,
    })
}

/// Conditional-stage output for every row, before gating.
pub fn conditional_values(model: &HurdleModel, x: &Matrix) -> Result<Vec<f64>, HurdleError> {
    Ok(match &model.conditional_model {
        ConditionalModel::Regressor(m) => {
            let raw = m.predict(x)?;
            let values = if model.target_transform_enabled {
                inverse_transform_target(&raw)
            } else {
                raw
            };
            values.into_iter().map(|v| v.max(0.0)).collect()
        }
        ConditionalModel::Classifier(m) => m.predict(x)?.into_iter().map(|c| c as f64).collect(),
    })
}

/// Hard gate: `values[i]` where `prob[i] >= threshold`, else 0.
pub fn gate(occurrence_prob: &[f64], values: &[f64], threshold: f64) -> Vec<f64> {
    occurrence_prob
        .iter()
        .zip(values)
        .map(|(&p, &v)| if p >= threshold { v } else { 0.0 })
        .collect()
}

/// Appends a one-hot block identifying series `index` of `k`. With fewer
/// than two series there is nothing to identify and `x` is returned as is.
pub fn with_series_block(x: &Matrix, index: usize, k: usize) -> Matrix {
    if k < 2 {
        return x.clone();
    }
    let mut block = Matrix::zeros(x.nrows(), k);
    for i in 0..x.nrows() {
        block.set(i, index, 1.0);
    }
    x.hstack(&block).expect("row counts match")
}

/// Models keyed by series. In global scope every entry shares one model.
#[derive(Debug, Clone)]
pub struct ScopedModels {
    pub scope: Scope,
    pub series: Vec<String>,
    pub models: BTreeMap<String, Arc<HurdleModel>>,
}

impl ScopedModels {
    pub fn get(&self, series_id: &str) -> Option<&Arc<HurdleModel>> {
        self.models.get(series_id)
    }

    /// Predicts for rows of `series_id`, adding the series block in global
    /// scope.
    pub fn predict(&self, series_id: &str, x: &Matrix) -> Result<HurdleOutput, HurdleError> {
        let model = self.get(series_id).ok_or_else(|| HurdleError::UnknownSeries(series_id.into()))?;
        match self.scope {
            Scope::Local => predict_hurdle(model, x),
            Scope::Global => {
                let index = self.series.iter().position(|s| s == series_id).expect("series listed");
                predict_hurdle(model, &with_series_block(x, index, self.series.len()))
            }
        }
    }
}

/// Fits one model per series (local) or one shared model on the
/// concatenation with a series-identity block (global).
pub fn fit_scoped(
    datasets: &[TimeSeriesDataset],
    scope: Scope,
    classifier: &dyn Fit,
    conditional: &dyn Fit,
    opts: &HurdleOptions,
    execution: Execution,
) -> Result<ScopedModels, HurdleError> {
    if datasets.is_empty() {
        return Err(HurdleError::Input("no series given".into()));
    }
    let series: Vec<String> = datasets.iter().map(|d| d.series_id().to_string()).collect();
    let mut sorted = series.clone();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != series.len() {
        return Err(HurdleError::Input("duplicate series ids".into()));
    }
    let opts = HurdleOptions { scope, ..*opts };
    let models = match scope {
        Scope::Local => {
            let fitted = par::map(execution, datasets.iter().collect(), |ds| {
                fit_hurdle_with(classifier, conditional, ds.features(), ds.features(), ds.targets(), &opts)
            });
            series
                .iter()
                .cloned()
                .zip(fitted)
                .map(|(s, m)| m.map(|m| (s, Arc::new(m))))
                .collect::<Result<BTreeMap<_, _>, _>>()?
        }
        Scope::Global => {
            let names = datasets[0].feature_names();
            if let Some(bad) = datasets.iter().find(|d| d.feature_names() != names) {
                return Err(HurdleError::SchemaMismatch(format!(
                    "series `{}` has columns {:?}, expected {:?}",
                    bad.series_id(),
                    bad.feature_names(),
                    names
                )));
            }
            let k = datasets.len();
            let blocks: Vec<Matrix> = datasets
                .iter()
                .enumerate()
                .map(|(i, d)| with_series_block(d.features(), i, k))
                .collect();
            let x = Matrix::vstack(&blocks.iter().collect::<Vec<_>>()).map_err(|e| HurdleError::Input(e.to_string()))?;
            let y: Vec<f64> = datasets.iter().flat_map(|d| d.targets().iter().copied()).collect();
            let model = Arc::new(fit_hurdle_with(classifier, conditional, &x, &x, &y, &opts)?);
            series.iter().map(|s| (s.clone(), Arc::clone(&model))).collect()
        }
    };
    Ok(ScopedModels { scope, series, models })
}
