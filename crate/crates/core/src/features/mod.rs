//! Calendar features, input scaling, target transforms and recurrence plots.

mod calendar;
mod recurrence;
mod scaler;
mod target;

pub use calendar::{build_calendar_features, load_holidays, parse_holidays, CalendarFeatureConfig};
pub use recurrence::{
    default_epsilon, recurrence_plot, recurrence_summary_features, write_pgm, RecurrencePlot,
    SUMMARY_FEATURE_NAMES,
};
pub use scaler::{apply_scaler, fit_scaler, ScalerState, StandardScaler};
pub use target::{inverse_transform_target, transform_target};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("scaler has not been fitted")]
    NotFitted,
    #[error("expected {expected} columns, got {actual}")]
    ColumnMismatch { expected: usize, actual: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
