//! Experiment orchestration: rolling-origin evaluation with periodic
//! refits, stratified splits, paired model comparison and result tables.

pub mod appliance;
pub mod benchmark;
mod compare;
mod report;
mod rolling;
mod split;

pub use compare::{compare_models, Comparison, MetricSelector, Verdict, SIGNIFICANCE_LEVEL};
pub use report::{results_table, summarize, write_manifest, write_results_csv, Manifest, ModelSummary, SeriesInfo};
pub use rolling::{rolling_origin_evaluate, rolling_origin_evaluate_observed, test_blocks};
pub use split::stratified_split;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::DataError;
use crate::features::FeatureError;
use crate::hurdle::{HurdleError, Scope};
use crate::learners::{LearnerConfig, LearnerError, LearnerKind};
use crate::metrics::{EvaluationReport, MetricError};
use crate::par::Execution;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("planning error: {0}")]
    Planning(String),
    #[error("leakage: model `{model}` predicts {timestamp} with training data up to {train_end} (horizon {horizon_hours}h)")]
    Leakage {
        model: String,
        timestamp: DateTime<Utc>,
        train_end: DateTime<Utc>,
        horizon_hours: u32,
    },
    #[error("pairing error: {0}")]
    Pairing(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Hurdle(#[from] HurdleError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A model evaluated by the harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelSpec {
    ZeroPredictor {
        name: String,
    },
    /// A single regressor trained on all values.
    Regressor {
        name: String,
        config: LearnerConfig,
        transform_target: bool,
    },
    TwoFold {
        name: String,
        classifier: LearnerConfig,
        conditional: LearnerConfig,
        transform_target: bool,
    },
}

impl ModelSpec {
    pub fn zero() -> Self {
        Self::ZeroPredictor {
            name: "Zero Predictor".into(),
        }
    }

    pub fn regressor(name: impl Into<String>, config: LearnerConfig) -> Self {
        Self::Regressor {
            name: name.into(),
            config,
            transform_target: true,
        }
    }

    pub fn two_fold(name: impl Into<String>, classifier: LearnerConfig, conditional: LearnerConfig) -> Self {
        Self::TwoFold {
            name: name.into(),
            classifier,
            conditional,
            transform_target: true,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Self::ZeroPredictor { name } | Self::Regressor { name, .. } | Self::TwoFold { name, .. } => name,
        }
    }

    pub fn is_two_fold(&self) -> bool {
        matches!(self, Self::TwoFold { .. })
    }

    /// Whether every repetition yields the same fit regardless of seed.
    pub fn is_deterministic(&self) -> bool {
        match self {
            Self::ZeroPredictor { .. } => true,
            Self::Regressor { config, .. } => !config.is_stochastic(),
            Self::TwoFold { classifier, conditional, .. } => !classifier.is_stochastic() && !conditional.is_stochastic(),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        match self {
            Self::ZeroPredictor { .. } => Ok(()),
            Self::Regressor { config, .. } => {
                config.validate()?;
                if config.task != crate::learners::Task::Regression {
                    return Err(HarnessError::Config(format!("`{}` needs a regression learner", self.name())));
                }
                Ok(())
            }
            Self::TwoFold { classifier, conditional, .. } => {
                classifier.validate()?;
                conditional.validate()?;
                if classifier.task != crate::learners::Task::BinaryClassification || classifier.kind == LearnerKind::Zero {
                    return Err(HarnessError::Config(format!("`{}` needs a binary classifier", self.name())));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub horizon_hours: u32,
    /// Final whole UTC days of the data used for testing.
    pub test_span_days: u32,
    pub retrain_cadence_hours: u32,
    pub repetitions: u32,
    pub scope: Scope,
    pub models: Vec<ModelSpec>,
    pub seed_base: u64,
    /// Gap between the last training timestamp and the first prediction
    /// of a block. `None` uses the horizon; smaller values leak and are
    /// rejected at runtime.
    pub training_gap_hours: Option<u32>,
    pub scale_features: bool,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        Self {
            horizon_hours: 24,
            test_span_days: 30,
            retrain_cadence_hours: 24,
            repetitions: 20,
            scope: Scope::Local,
            models: Vec::new(),
            seed_base: 0,
            training_gap_hours: None,
            scale_features: true,
            execution: Execution::default(),
        }
    }
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.horizon_hours == 0 {
            return Err(HarnessError::Config("horizon must be positive".into()));
        }
        if self.retrain_cadence_hours == 0 || self.test_span_days == 0 {
            return Err(HarnessError::Config("retrain cadence and test span must be positive".into()));
        }
        if self.repetitions == 0 {
            return Err(HarnessError::Config("at least one repetition is required".into()));
        }
        if self.models.is_empty() {
            return Err(HarnessError::Config("no models to evaluate".into()));
        }
        let mut names: Vec<&str> = self.models.iter().map(ModelSpec::name).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(HarnessError::Config("model names must be unique".into()));
        }
        self.models.iter().try_for_each(ModelSpec::validate)
    }

    pub fn seed_for(&self, repetition: u32) -> u64 {
        self.seed_base.wrapping_add(u64::from(repetition))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub timestamp: DateTime<Utc>,
    pub actual: f64,
    /// Classifier probability for two-fold models; the attributed 0/1
    /// occurrence for plain regressors.
    pub occurrence_prob: f64,
    pub combined: f64,
    pub predicted_occurrence: bool,
    /// Decision threshold of the two-fold model that produced the row.
    pub threshold: Option<f64>,
    /// Latest timestamp in the training data of the producing fit.
    pub train_end: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub model_name: String,
    pub series_id: String,
    pub scope: Scope,
    pub repetition: u32,
    pub seed: u64,
    pub report: EvaluationReport,
    pub predictions: Vec<Prediction>,
}

/// A training call made by the harness.
#[derive(Debug, Clone, PartialEq)]
pub struct FitEvent {
    pub model: String,
    pub repetition: u32,
    pub series: Vec<String>,
    pub block_start: DateTime<Utc>,
    pub train_end: DateTime<Utc>,
    pub n_rows: usize,
}

/// Hook called once per fit, from worker threads.
pub trait FitObserver: Send + Sync {
    fn on_fit(&self, event: &FitEvent);
}
