use serde::{Deserialize, Serialize};

use super::DataError;

/// How the activity mask behind a window was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindowProvenance {
    /// Every value exceeds a fixed idle threshold.
    IdleThreshold,
    /// The mask came from an activity classifier (or any external gate).
    Classifier,
}

/// A maximal contiguous active run `[start_index, end_index)` of a parent series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityWindow {
    pub start_index: usize,
    pub end_index: usize,
    pub values: Vec<f64>,
    pub provenance: WindowProvenance,
}

impl ActivityWindow {
    pub fn len(&self) -> usize {
        self.end_index - self.start_index
    }

    pub fn is_empty(&self) -> bool {
        self.end_index == self.start_index
    }
}

fn runs(series: &[f64], mask: &[bool], provenance: WindowProvenance) -> Vec<ActivityWindow> {
    let mut out = Vec::new();
    let mut start = None;
    for i in 0..=mask.len() {
        let on = i < mask.len() && mask[i];
        match (on, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push(ActivityWindow {
                    start_index: s,
                    end_index: i,
                    values: series[s..i].to_vec(),
                    provenance,
                });
                start = None;
            }
            _ => {}
        }
    }
    out
}

/// Maximal runs where `mask` is true.
pub fn extract_activity_windows(series: &[f64], mask: &[bool]) -> Result<Vec<ActivityWindow>, DataError> {
    if series.len() != mask.len() {
        return Err(DataError::Validation(format!(
            "mask length {} does not match series length {}",
            mask.len(),
            series.len()
        )));
    }
    Ok(runs(series, mask, WindowProvenance::Classifier))
}

/// Maximal runs of values strictly above `idle_threshold`.
pub fn threshold_activity_windows(series: &[f64], idle_threshold: f64) -> Vec<ActivityWindow> {
    let mask: Vec<bool> = series.iter().map(|&v| v > idle_threshold).collect();
    runs(series, &mask, WindowProvenance::IdleThreshold)
}

/// Splits a regularly sampled series into consecutive windows of
/// `window_len` samples. Windows that would span a missing sample (two
/// timestamps further apart than `period_secs`) are discarded.
///
/// Returns `(start_index, values)` pairs.
pub fn complete_windows(
    timestamps_secs: &[i64],
    values: &[f64],
    period_secs: i64,
    window_len: usize,
) -> Result<Vec<(usize, Vec<f64>)>, DataError> {
    if timestamps_secs.len() != values.len() {
        return Err(DataError::Validation("timestamps and values differ in length".into()));
    }
    if period_secs <= 0 || window_len == 0 {
        return Err(DataError::Config("period and window length must be positive".into()));
    }
    let mut out = Vec::new();
    let mut run_start = 0;
    for i in 1..=values.len() {
        let broken = i == values.len() || timestamps_secs[i] - timestamps_secs[i - 1] != period_secs;
        if broken {
            let mut s = run_start;
            while s + window_len <= i {
                out.push((s, values[s..s + window_len].to_vec()));
                s += window_len;
            }
            run_start = i;
        }
    }
    Ok(out)
}
