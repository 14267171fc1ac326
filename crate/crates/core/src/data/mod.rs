//! Dataset representation, CSV ingestion, temporal aggregation, activity
//! windowing and synthetic zero-inflated series.

mod activity;
mod io;
mod synthetic;

pub use activity::{
    complete_windows, extract_activity_windows, threshold_activity_windows, ActivityWindow,
    WindowProvenance,
};
pub use io::{load_csv, load_csv_grouped, parse_timestamp, read_csv, read_csv_grouped, write_csv, CsvSchema};
pub use synthetic::{generate_zip_series, generate_zip_series_from, CalendarProfile, ZipParams};

use std::collections::BTreeMap;

use chrono::{DateTime, TimeZone, Utc};
use thiserror::Error;

use crate::matrix::{Matrix, ShapeError};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("no data rows")]
    NoData,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("column `{0}` not found in header")]
    MissingColumn(String),
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A timestamped, non-negative target series with an aligned feature table.
///
/// Immutable after construction; every constructor checks that timestamps
/// strictly increase, targets are finite and non-negative, and the feature
/// table has one row per timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesDataset {
    series_id: String,
    timestamps: Vec<DateTime<Utc>>,
    targets: Vec<f64>,
    features: Matrix,
    feature_names: Vec<String>,
}

impl TimeSeriesDataset {
    pub fn new(
        series_id: impl Into<String>,
        timestamps: Vec<DateTime<Utc>>,
        targets: Vec<f64>,
        features: Matrix,
        feature_names: Vec<String>,
    ) -> Result<Self, DataError> {
        if timestamps.len() != targets.len() {
            return Err(DataError::Validation(format!(
                "{} timestamps but {} targets",
                timestamps.len(),
                targets.len()
            )));
        }
        if features.nrows() != targets.len() {
            return Err(DataError::Validation(format!(
                "{} feature rows but {} targets",
                features.nrows(),
                targets.len()
            )));
        }
        if feature_names.len() != features.ncols() {
            return Err(DataError::Validation(format!(
                "{} feature names for {} feature columns",
                feature_names.len(),
                features.ncols()
            )));
        }
        if let Some(w) = timestamps.windows(2).position(|w| w[0] >= w[1]) {
            return Err(DataError::Validation(format!(
                "timestamps not strictly increasing at {} -> {}",
                timestamps[w], timestamps[w + 1]
            )));
        }
        if let Some(i) = targets.iter().position(|t| !t.is_finite() || *t < 0.0) {
            return Err(DataError::Validation(format!(
                "target {} at {} is not a finite non-negative value",
                targets[i], timestamps[i]
            )));
        }
        Ok(Self {
            series_id: series_id.into(),
            timestamps,
            targets,
            features,
            feature_names,
        })
    }

    /// Dataset without feature columns.
    pub fn from_targets(
        series_id: impl Into<String>,
        timestamps: Vec<DateTime<Utc>>,
        targets: Vec<f64>,
    ) -> Result<Self, DataError> {
        let n = targets.len();
        Self::new(series_id, timestamps, targets, Matrix::empty_rows(n), Vec::new())
    }

    /// Replaces the feature table, keeping timestamps and targets.
    pub fn with_features(self, features: Matrix, feature_names: Vec<String>) -> Result<Self, DataError> {
        Self::new(self.series_id, self.timestamps, self.targets, features, feature_names)
    }

    pub fn series_id(&self) -> &str {
        &self.series_id
    }

    pub fn timestamps(&self) -> &[DateTime<Utc>] {
        &self.timestamps
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// `1{target != 0}` per row.
    pub fn occurrence_labels(&self) -> Vec<bool> {
        self.targets.iter().map(|&t| t != 0.0).collect()
    }

    /// Fraction of rows whose target is exactly zero.
    pub fn zero_fraction(&self) -> f64 {
        if self.targets.is_empty() {
            return 0.0;
        }
        self.targets.iter().filter(|&&t| t == 0.0).count() as f64 / self.targets.len() as f64
    }

    /// Rows `[start, end)` as a new dataset.
    pub fn slice(&self, start: usize, end: usize) -> TimeSeriesDataset {
        TimeSeriesDataset {
            series_id: self.series_id.clone(),
            timestamps: self.timestamps[start..end].to_vec(),
            targets: self.targets[start..end].to_vec(),
            features: self.features.slice_rows(start, end),
            feature_names: self.feature_names.clone(),
        }
    }
}

/// Sums targets into fixed UTC buckets of `bucket_hours`.
///
/// Every bucket between the first and last observation is emitted, with
/// target 0 when no observation falls into it. Feature columns are not
/// carried over: features are rebuilt from the bucket timestamps.
pub fn aggregate(ds: &TimeSeriesDataset, bucket_hours: u32) -> Result<TimeSeriesDataset, DataError> {
    if bucket_hours == 0 || 24 % bucket_hours != 0 {
        return Err(DataError::Config(format!(
            "bucket of {bucket_hours}h must be a positive whole number of hours dividing 24"
        )));
    }
    if ds.is_empty() {
        return Err(DataError::NoData);
    }
    let width = i64::from(bucket_hours) * 3600;
    let mut sums: BTreeMap<i64, f64> = BTreeMap::new();
    for (ts, &y) in ds.timestamps.iter().zip(&ds.targets) {
        *sums.entry(ts.timestamp().div_euclid(width)).or_insert(0.0) += y;
    }
    let first = *sums.keys().next().expect("non-empty");
    let last = *sums.keys().next_back().expect("non-empty");
    let mut timestamps = Vec::with_capacity((last - first + 1) as usize);
    let mut targets = Vec::with_capacity(timestamps.capacity());
    for bucket in first..=last {
        let start = Utc
            .timestamp_opt(bucket * width, 0)
            .single()
            .ok_or_else(|| DataError::Validation(format!("bucket {bucket} out of range")))?;
        timestamps.push(start);
        targets.push(sums.get(&bucket).copied().unwrap_or(0.0));
    }
    TimeSeriesDataset::from_targets(ds.series_id.clone(), timestamps, targets)
}
