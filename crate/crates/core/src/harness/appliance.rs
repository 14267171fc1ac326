//! Sparse multi-class activity experiment: windows of a power-like signal
//! that are mostly idle, with short bursts from one of several appliance
//! archetypes. A two-fold pipeline (activity detector, then a classifier
//! trained on the activity-only segment) is compared with a single-stage
//! classifier over the whole window.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{stratified_split, HarnessError};
use crate::data::extract_activity_windows;
use crate::features::{default_epsilon, recurrence_plot, recurrence_summary_features};
use crate::hurdle::{fit_hurdle_with, predict_hurdle_with, HurdleMode, HurdleOptions};
use crate::learners::{ClassWeights, LearnerConfig, MulticlassModel, Task};
use crate::matrix::Matrix;
use crate::metrics::{confusion_metrics_with_labels, wilcoxon_signed_rank, ClassificationReport, MetricError, WilcoxonResult};
use crate::par::{self, Execution};

pub const N_ARCHETYPES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApplianceConfig {
    pub n_windows: usize,
    pub window_len: usize,
    pub idle_fraction: f64,
    /// Readings more than this above the window minimum count as activity.
    pub activity_delta: f64,
    pub recurrence_max_size: usize,
    pub train_fraction: f64,
    pub repetitions: u32,
    pub seed: u64,
}

impl Default for ApplianceConfig {
    fn default() -> Self {
        Self {
            n_windows: 1000,
            window_len: 60,
            idle_fraction: 0.75,
            activity_delta: 50.0,
            recurrence_max_size: 64,
            train_fraction: 0.8,
            repetitions: 20,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApplianceData {
    pub windows: Vec<Vec<f64>>,
    /// 0 = idle, `1..=N_ARCHETYPES` = active appliance.
    pub labels: Vec<usize>,
}

fn burst(archetype: usize, len: usize, amplitude: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..len)
        .map(|t| {
            let x = t as f64;
            match archetype {
                // steady plateau with a slow wobble
                1 => amplitude * (1.0 + 0.01 * (x / 5.0).sin()),
                // compressor cycling
                2 => {
                    if (t / 3) % 2 == 0 {
                        amplitude
                    } else {
                        0.3 * amplitude
                    }
                }
                // ramp
                3 => amplitude * (0.3 + 0.7 * x / (len - 1) as f64),
                // erratic load
                4 => amplitude * rng.gen_range(0.3..1.0),
                // high phase followed by a low phase
                _ => {
                    if t < len / 2 {
                        amplitude
                    } else {
                        0.4 * amplitude
                    }
                }
            }
        })
        .collect()
}

/// Generates labelled windows. Every window sits on a random standby
/// level with small noise; idle windows may carry a short spike below the
/// activity threshold, active ones contain one burst of random length,
/// position and amplitude.
pub fn generate_appliance_windows(cfg: &ApplianceConfig) -> Result<ApplianceData, HarnessError> {
    if cfg.window_len < 16 || cfg.n_windows < 10 * (N_ARCHETYPES + 1) || !(0.0..1.0).contains(&cfg.idle_fraction) {
        return Err(HarnessError::Config("appliance profile too small or idle fraction out of range".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_idle = (cfg.idle_fraction * cfg.n_windows as f64).round() as usize;
    let mut windows = Vec::with_capacity(cfg.n_windows);
    let mut labels = Vec::with_capacity(cfg.n_windows);
    let len = cfg.window_len;
    for i in 0..cfg.n_windows {
        let standby = rng.gen_range(5.0..60.0);
        let mut w: Vec<f64> = (0..len).map(|_| standby + rng.gen_range(-2.0..2.0)).collect();
        let label = if i < n_idle { 0 } else { 1 + (i - n_idle) % N_ARCHETYPES };
        if label == 0 {
            if rng.gen_bool(0.2) {
                let at = rng.gen_range(0..len - 3);
                let spike = rng.gen_range(10.0..0.6 * cfg.activity_delta);
                w[at..at + 3].iter_mut().for_each(|v| *v += spike);
            }
        } else {
            let burst_len = rng.gen_range(len / 5..=len * 3 / 5);
            let at = rng.gen_range(0..=len - burst_len);
            let amplitude = rng.gen_range(300.0..1500.0);
            for (v, b) in w[at..at + burst_len].iter_mut().zip(burst(label, burst_len, amplitude, &mut rng)) {
                *v += b;
            }
        }
        windows.push(w);
        labels.push(label);
    }
    Ok(ApplianceData { windows, labels })
}

/// Recurrence summary plus mean, standard deviation and maximum of `values`.
pub fn segment_features(values: &[f64], max_size: usize) -> Vec<f64> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut f = match recurrence_plot(values, default_epsilon(values), max_size) {
        Ok(rp) => recurrence_summary_features(&rp),
        Err(_) => vec![0.0; crate::features::SUMMARY_FEATURE_NAMES.len()],
    };
    f.extend([mean, std, max]);
    f
}

/// Readings of `window` flagged as activity, in order. Falls back to the
/// whole window when fewer than two readings qualify.
pub fn activity_segment(window: &[f64], delta: f64) -> Vec<f64> {
    let min = window.iter().copied().fold(f64::INFINITY, f64::min);
    let mask: Vec<bool> = window.iter().map(|&v| v > min + delta).collect();
    let segment: Vec<f64> = extract_activity_windows(window, &mask)
        .expect("mask matches window")
        .into_iter()
        .flat_map(|w| w.values)
        .collect();
    if segment.len() < 2 {
        window.to_vec()
    } else {
        segment
    }
}

fn feature_matrix(rows: Vec<Vec<f64>>) -> Matrix {
    Matrix::from_rows(&rows).expect("fixed-length feature rows")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApplianceRun {
    pub repetition: u32,
    pub seed: u64,
    pub two_fold: ClassificationReport,
    pub single_stage: ClassificationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApplianceOutcome {
    pub runs: Vec<ApplianceRun>,
    pub mean_two_fold_f1: f64,
    pub mean_single_stage_f1: f64,
    /// Paired test on weighted F1 (two-fold minus single-stage).
    pub wilcoxon: Option<WilcoxonResult>,
    pub notes: Vec<String>,
}

/// Both pipelines use class-balanced HGB learners. The activity detector
/// and the single-stage model see whole-window features; the second stage
/// sees features of the activity-only segment.
pub fn run_appliance_experiment(cfg: &ApplianceConfig, execution: Execution) -> Result<ApplianceOutcome, HarnessError> {
    let data = generate_appliance_windows(cfg)?;
    let whole = feature_matrix(data.windows.iter().map(|w| segment_features(w, cfg.recurrence_max_size)).collect());
    let active = feature_matrix(
        data.windows
            .iter()
            .map(|w| segment_features(&activity_segment(w, cfg.activity_delta), cfg.recurrence_max_size))
            .collect(),
    );
    let balanced = |task| LearnerConfig::hgb(task).with_class_weights(ClassWeights::Balanced);
    let all_labels: Vec<usize> = (0..=N_ARCHETYPES).collect();

    let runs = par::map(execution, (0..cfg.repetitions).collect(), |repetition| -> Result<ApplianceRun, HarnessError> {
        let seed = cfg.seed.wrapping_add(u64::from(repetition));
        let (train, test) = stratified_split(&data.labels, cfg.train_fraction, seed)?;
        let y_train: Vec<f64> = train.iter().map(|&i| data.labels[i] as f64).collect();
        let truth: Vec<usize> = test.iter().map(|&i| data.labels[i]).collect();

        let opts = HurdleOptions {
            mode: HurdleMode::Classification,
            transform_target: false,
            ..HurdleOptions::default()
        };
        let detector = balanced(Task::BinaryClassification).with_seed(seed);
        let stage_two = balanced(Task::BinaryClassification).with_seed(seed);
        let model = fit_hurdle_with(&detector, &stage_two, &whole.select_rows(&train), &active.select_rows(&train), &y_train, &opts)?;
        let out = predict_hurdle_with(&model, &whole.select_rows(&test), &active.select_rows(&test))?;
        let two_fold_pred: Vec<usize> = out.combined.iter().map(|&c| c as usize).collect();

        let train_labels: Vec<usize> = train.iter().map(|&i| data.labels[i]).collect();
        let single = MulticlassModel::fit(&balanced(Task::BinaryClassification).with_seed(seed), &whole.select_rows(&train), &train_labels)?;
        let single_pred = single.predict(&whole.select_rows(&test))?;

        Ok(ApplianceRun {
            repetition,
            seed,
            two_fold: confusion_metrics_with_labels(&two_fold_pred, &truth, &all_labels),
            single_stage: confusion_metrics_with_labels(&single_pred, &truth, &all_labels),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;

    let a: Vec<f64> = runs.iter().map(|r| r.two_fold.weighted_f1).collect();
    let b: Vec<f64> = runs.iter().map(|r| r.single_stage.weighted_f1).collect();
    let mut notes = Vec::new();
    let wilcoxon = match wilcoxon_signed_rank(&a, &b) {
        Ok(w) => Some(w),
        Err(MetricError::NoEvidence) => {
            notes.push("every paired F1 difference is zero".into());
            None
        }
        Err(e) => return Err(e.into()),
    };
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
    Ok(ApplianceOutcome {
        mean_two_fold_f1: mean(&a),
        mean_single_stage_f1: mean(&b),
        runs,
        wilcoxon,
        notes,
    })
}
