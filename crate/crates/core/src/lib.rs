//! Two-fold (hurdle) modelling for zero-inflated targets.
//!
//! An occurrence classifier decides whether a value is zero; a second model,
//! trained only on non-zero rows, predicts the value (or the class) when the
//! classifier opens the gate. The crate bundles the pieces needed to train
//! and evaluate such models on time series: calendar features, in-repo
//! learners, metrics that are not distorted by the zeros (MASE on subsets,
//! AUC ROC with class-attribution strategies), a Wilcoxon signed-rank test
//! and a rolling-origin evaluation harness.

pub mod data;
pub mod features;
pub mod harness;
pub mod hurdle;
pub mod learners;
pub mod matrix;
pub mod metrics;
pub mod par;

pub use matrix::Matrix;
