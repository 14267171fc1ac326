//! Supervised learners: least squares, logistic regression, a one-hidden-layer
//! MLP and histogram gradient boosting, behind one configuration type.

pub mod hgb;
mod linalg;
mod linear;
pub mod mlp;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;

pub use hgb::{find_best_split, BinMapper, HgbEnsemble, HgbParams, SplitInfo};
pub use linear::{LinearParams, LOGISTIC_L2};
pub use mlp::{loss_and_gradient, MlpNet, MlpParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnerError {
    #[error("training labels contain a single class ({0}); both classes are required")]
    SingleClass(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("expected {expected} columns, got {actual}")]
    Shape { expected: usize, actual: usize },
    #[error("invalid learner configuration: {0}")]
    Config(String),
    #[error("invalid training input: {0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Zero,
    Linear,
    Logistic,
    Mlp,
    Hgb,
}

impl LearnerKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Linear => "linear",
            Self::Logistic => "logistic",
            Self::Mlp => "mlp",
            Self::Hgb => "hgb",
        }
    }
}

impl std::str::FromStr for LearnerKind {
    type Err = LearnerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" => Ok(Self::Zero),
            "linear" | "lr" => Ok(Self::Linear),
            "logistic" => Ok(Self::Logistic),
            "mlp" => Ok(Self::Mlp),
            "hgb" => Ok(Self::Hgb),
            other => Err(LearnerError::Config(format!("unknown learner kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Regression,
    BinaryClassification,
}

/// Per-class loss weights, multiplied into the sample weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassWeights {
    /// `n_samples / (n_classes * n_c)`.
    Balanced,
    Explicit(BTreeMap<usize, f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub kind: LearnerKind,
    pub task: Task,
    pub hgb: HgbParams,
    pub mlp: MlpParams,
    pub class_weights: Option<ClassWeights>,
    pub seed: u64,
}

impl LearnerConfig {
    pub fn new(kind: LearnerKind, task: Task) -> Self {
        Self {
            kind,
            task,
            hgb: HgbParams::default(),
            mlp: MlpParams::default(),
            class_weights: None,
            seed: 0,
        }
    }

    pub fn linear() -> Self {
        Self::new(LearnerKind::Linear, Task::Regression)
    }

    pub fn logistic() -> Self {
        Self::new(LearnerKind::Logistic, Task::BinaryClassification)
    }

    pub fn mlp(task: Task) -> Self {
        Self::new(LearnerKind::Mlp, task)
    }

    pub fn hgb(task: Task) -> Self {
        Self::new(LearnerKind::Hgb, task)
    }

    pub fn zero(task: Task) -> Self {
        Self::new(LearnerKind::Zero, task)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_class_weights(mut self, weights: ClassWeights) -> Self {
        self.class_weights = Some(weights);
        self
    }

    /// Whether the fitted model depends on the seed.
    pub fn is_stochastic(&self) -> bool {
        self.kind == LearnerKind::Mlp
    }

    pub fn validate(&self) -> Result<(), LearnerError> {
        let bad = |m: &str| Err(LearnerError::Config(m.to_string()));
        match (self.kind, self.task) {
            (LearnerKind::Linear, Task::BinaryClassification) => return bad("linear learner is regression only"),
            (LearnerKind::Logistic, Task::Regression) => return bad("logistic learner is classification only"),
            _ => {}
        }
        if self.kind == LearnerKind::Hgb {
            let h = &self.hgb;
            if !(h.learning_rate > 0.0 && h.learning_rate.is_finite()) {
                return bad("hgb learning rate must be positive");
            }
            if !(2..=256).contains(&h.max_bins) {
                return bad("hgb bins must lie in 2..=256");
            }
            if h.max_leaves < 2 || h.min_samples_leaf == 0 {
                return bad("hgb needs max_leaves >= 2 and min_samples_leaf >= 1");
            }
            if h.l2_regularization < 0.0 || h.min_hessian_leaf < 0.0 {
                return bad("hgb regularization must be non-negative");
            }
        }
        if self.kind == LearnerKind::Mlp {
            let m = &self.mlp;
            if m.hidden == 0 || m.epochs == 0 {
                return bad("mlp needs hidden >= 1 and epochs >= 1");
            }
            if !(m.learning_rate > 0.0) || !(0.0..1.0).contains(&m.beta1) || !(0.0..1.0).contains(&m.beta2) || !(m.epsilon > 0.0) || m.alpha < 0.0 {
                return bad("mlp optimizer settings out of range");
            }
        }
        if let Some(cw) = &self.class_weights {
            if self.task == Task::Regression {
                return bad("class weights require a classification task");
            }
            if let ClassWeights::Explicit(map) = cw {
                if map.values().any(|w| !(*w > 0.0 && w.is_finite())) {
                    return bad("class weights must be positive");
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelParams {
    Zero,
    Linear(LinearParams),
    Mlp(MlpNet),
    Hgb(HgbEnsemble),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub kind: LearnerKind,
    pub task: Task,
    /// Zero for the zero predictor, which accepts any column count.
    pub n_features: usize,
    pub params: ModelParams,
    pub training_loss_trace: Vec<f64>,
    pub config: LearnerConfig,
}

impl FittedModel {
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>, LearnerError> {
        if let ModelParams::Zero = self.params {
            return Ok(vec![0.0; x.nrows()]);
        }
        if x.ncols() != self.n_features {
            return Err(LearnerError::Shape {
                expected: self.n_features,
                actual: x.ncols(),
            });
        }
        Ok(x.rows_iter().map(|row| self.predict_row(row)).collect())
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        match &self.params {
            ModelParams::Zero => 0.0,
            ModelParams::Linear(p) => match self.task {
                Task::Regression => p.decision(row),
                Task::BinaryClassification => sigmoid(p.decision(row)),
            },
            ModelParams::Mlp(net) => net.predict_row(row, self.task),
            ModelParams::Hgb(ens) => ens.predict_row(row, self.task),
        }
    }
}

/// A model that predicts 0 (and occurrence probability 0) everywhere.
pub fn zero_predictor() -> FittedModel {
    FittedModel {
        kind: LearnerKind::Zero,
        task: Task::Regression,
        n_features: 0,
        params: ModelParams::Zero,
        training_loss_trace: vec![0.0],
        config: LearnerConfig::zero(Task::Regression),
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `n / (k * n_c)` for each sample's class, over the classes present.
pub fn balanced_weights(labels: &[usize]) -> Vec<f64> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_default() += 1;
    }
    let n = labels.len() as f64;
    let k = counts.len() as f64;
    labels.iter().map(|l| n / (k * counts[l] as f64)).collect()
}

/// Anything that turns a design matrix and targets into a [`FittedModel`].
pub trait Fit: Sync {
    fn fit_model(&self, x: &Matrix, y: &[f64], weights: Option<&[f64]>) -> Result<FittedModel, LearnerError>;

    fn fit_multiclass(&self, x: &Matrix, labels: &[usize]) -> Result<MulticlassModel, LearnerError>;
}

impl Fit for LearnerConfig {
    fn fit_model(&self, x: &Matrix, y: &[f64], weights: Option<&[f64]>) -> Result<FittedModel, LearnerError> {
        fit(self, x, y, weights)
    }

    fn fit_multiclass(&self, x: &Matrix, labels: &[usize]) -> Result<MulticlassModel, LearnerError> {
        MulticlassModel::fit(self, x, labels)
    }
}

pub fn fit(config: &LearnerConfig, x: &Matrix, y: &[f64], weights: Option<&[f64]>) -> Result<FittedModel, LearnerError> {
    config.validate()?;
    let n = x.nrows();
    if y.len() != n {
        return Err(LearnerError::Input(format!("{} targets for {} rows", y.len(), n)));
    }
    if n < 2 {
        return Err(LearnerError::Input("at least 2 training rows are required".into()));
    }
    if !x.is_finite() {
        return Err(LearnerError::NonFinite("features"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(LearnerError::NonFinite("targets"));
    }
    let mut w = match weights {
        Some(w) if w.len() != n => return Err(LearnerError::Input(format!("{} weights for {} rows", w.len(), n))),
        Some(w) if w.iter().any(|v| !(*v >= 0.0 && v.is_finite())) => {
            return Err(LearnerError::Input("sample weights must be finite and non-negative".into()))
        }
        Some(w) => w.to_vec(),
        None => vec![1.0; n],
    };
    if config.task == Task::BinaryClassification {
        if y.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(LearnerError::Input("classification labels must be 0 or 1".into()));
        }
        let positives = y.iter().filter(|&&v| v == 1.0).count();
        if positives == 0 {
            return Err(LearnerError::SingleClass("only class 0 present".into()));
        }
        if positives == n {
            return Err(LearnerError::SingleClass("only class 1 present".into()));
        }
        if let Some(cw) = &config.class_weights {
            let labels: Vec<usize> = y.iter().map(|&v| v as usize).collect();
            let factors = match cw {
                ClassWeights::Balanced => balanced_weights(&labels),
                ClassWeights::Explicit(map) => labels.iter().map(|l| map.get(l).copied().unwrap_or(1.0)).collect(),
            };
            w.iter_mut().zip(factors).for_each(|(a, b)| *a *= b);
        }
    }
    if !(w.iter().sum::<f64>() > 0.0) {
        return Err(LearnerError::Input("sample weights sum to zero".into()));
    }

    let (params, trace) = match config.kind {
        LearnerKind::Zero => (ModelParams::Zero, vec![0.0]),
        LearnerKind::Linear => {
            let (p, t) = linear::fit_least_squares(x, y, &w)?;
            (ModelParams::Linear(p), t)
        }
        LearnerKind::Logistic => {
            let (p, t) = linear::fit_logistic(x, y, &w)?;
            (ModelParams::Linear(p), t)
        }
        LearnerKind::Mlp => {
            let (net, t) = mlp::fit_mlp(x, y, &w, config.task, &config.mlp, config.seed);
            (ModelParams::Mlp(net), t)
        }
        LearnerKind::Hgb => {
            let (ens, t) = hgb::fit_hgb(x, y, &w, config.task, &config.hgb);
            (ModelParams::Hgb(ens), t)
        }
    };
    if trace.iter().any(|v| !v.is_finite()) {
        return Err(LearnerError::Numerical(format!("{} training diverged", config.kind.label())));
    }
    Ok(FittedModel {
        kind: config.kind,
        task: config.task,
        n_features: if config.kind == LearnerKind::Zero { 0 } else { x.ncols() },
        params,
        training_loss_trace: trace,
        config: config.clone(),
    })
}

/// One-vs-rest multiclass wrapper over binary learners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulticlassModel {
    pub classes: Vec<usize>,
    pub models: Vec<FittedModel>,
}

impl MulticlassModel {
    /// Fits one binary model per class. Class weights from `config` are
    /// resolved on the multiclass labels and passed down as sample weights;
    /// model `i` is seeded with `config.seed + i`.
    pub fn fit(config: &LearnerConfig, x: &Matrix, labels: &[usize]) -> Result<Self, LearnerError> {
        if labels.len() != x.nrows() {
            return Err(LearnerError::Input(format!("{} labels for {} rows", labels.len(), x.nrows())));
        }
        let classes: Vec<usize> = {
            let mut c = labels.to_vec();
            c.sort_unstable();
            c.dedup();
            c
        };
        if classes.len() < 2 {
            return Err(LearnerError::SingleClass(format!("only class {:?} present", classes)));
        }
        let weights = match &config.class_weights {
            None => vec![1.0; labels.len()],
            Some(ClassWeights::Balanced) => balanced_weights(labels),
            Some(ClassWeights::Explicit(map)) => labels.iter().map(|l| map.get(l).copied().unwrap_or(1.0)).collect(),
        };
        let models = classes
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let mut binary = config.clone();
                binary.task = Task::BinaryClassification;
                binary.class_weights = None;
                binary.seed = config.seed.wrapping_add(i as u64);
                let y: Vec<f64> = labels.iter().map(|&l| f64::from(u8::from(l == c))).collect();
                fit(&binary, x, &y, Some(&weights))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { classes, models })
    }

    /// Per-class one-vs-rest scores, one row per sample.
    pub fn predict_scores(&self, x: &Matrix) -> Result<Matrix, LearnerError> {
        let per_class = self.models.iter().map(|m| m.predict(x)).collect::<Result<Vec<_>, _>>()?;
        let mut out = Matrix::zeros(x.nrows(), self.classes.len());
        for (c, scores) in per_class.iter().enumerate() {
            for (i, s) in scores.iter().enumerate() {
                out.set(i, c, *s);
            }
        }
        Ok(out)
    }

    /// Highest-scoring class; ties go to the smaller label.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>, LearnerError> {
        let scores = self.predict_scores(x)?;
        Ok(scores
            .rows_iter()
            .map(|row| {
                let mut best = 0;
                for (c, s) in row.iter().enumerate() {
                    if *s > row[best] {
                        best = c;
                    }
                }
                self.classes[best]
            })
            .collect())
    }
}
