use std::collections::BTreeMap;

use chrono::{DateTime, Duration, NaiveTime, Utc};

use super::{ExperimentPlan, FitEvent, FitObserver, HarnessError, ModelSpec, Prediction, RunResult};
use crate::data::TimeSeriesDataset;
use crate::features::{apply_scaler, fit_scaler, inverse_transform_target, transform_target};
use crate::hurdle::{fit_hurdle_with, predict_hurdle, with_series_block, HurdleModel, HurdleOptions, Scope};
use crate::learners::{fit, FittedModel, LearnerConfig};
use crate::matrix::Matrix;
use crate::metrics::{
    auc_roc, confusion_metrics_with_labels, mase_variants, naive_scale, Attribution, AucStrategy, EvaluationReport,
};
use crate::par;

/// One refit: train on rows at or before `cutoff`, predict `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
    pub cutoff: DateTime<Utc>,
}

/// Refit blocks covering the final `test_span_days` UTC days of the data.
pub fn test_blocks(plan: &ExperimentPlan, datasets: &[TimeSeriesDataset]) -> Result<Vec<Block>, HarnessError> {
    let last = datasets
        .iter()
        .filter_map(|d| d.timestamps().last().copied())
        .max()
        .ok_or_else(|| HarnessError::Planning("no data".into()))?;
    let last_day = last.date_naive().and_time(NaiveTime::MIN).and_utc();
    let test_start = last_day - Duration::days(i64::from(plan.test_span_days) - 1);
    let cadence = Duration::hours(i64::from(plan.retrain_cadence_hours));
    let gap = Duration::hours(i64::from(plan.training_gap_hours.unwrap_or(plan.horizon_hours)));
    let mut blocks = Vec::new();
    let mut start = test_start;
    while start <= last {
        blocks.push(Block {
            start,
            end: start + cadence,
            cutoff: start - gap,
        });
        start += cadence;
    }
    for block in &blocks {
        for ds in datasets {
            let ts = ds.timestamps();
            let n_train = ts.partition_point(|t| *t <= block.cutoff);
            let enough_history = ts.first().is_some_and(|first| *first <= block.start - cadence * 2);
            if !enough_history || n_train < 2 {
                return Err(HarnessError::Planning(format!(
                    "series `{}` has insufficient history for test day {}",
                    ds.series_id(),
                    block.start.format("%Y-%m-%d")
                )));
            }
        }
    }
    Ok(blocks)
}

pub fn rolling_origin_evaluate(plan: &ExperimentPlan, datasets: &[TimeSeriesDataset]) -> Result<Vec<RunResult>, HarnessError> {
    rolling_origin_evaluate_observed(plan, datasets, None)
}

struct Unit {
    model: usize,
    repetition: u32,
    group: Vec<usize>,
    block: usize,
}

struct SeriesBlock {
    series: usize,
    predictions: Vec<Prediction>,
    scale: Option<f64>,
}

enum Fitted {
    Zero,
    Regressor(FittedModel, bool),
    TwoFold(HurdleModel),
}

/// Rolling-origin evaluation. Every `(model, repetition, series group,
/// block)` refit is an independent unit of work; models that ignore the
/// seed are fitted once and their results reused for every repetition.
pub fn rolling_origin_evaluate_observed(
    plan: &ExperimentPlan,
    datasets: &[TimeSeriesDataset],
    observer: Option<&dyn FitObserver>,
) -> Result<Vec<RunResult>, HarnessError> {
    plan.validate()?;
    if datasets.is_empty() {
        return Err(HarnessError::Planning("no series given".into()));
    }
    if plan.scope == Scope::Global {
        let names = datasets[0].feature_names();
        if let Some(bad) = datasets.iter().find(|d| d.feature_names() != names) {
            return Err(HarnessError::Planning(format!(
                "series `{}` feature columns differ from `{}`",
                bad.series_id(),
                datasets[0].series_id()
            )));
        }
    }
    let blocks = test_blocks(plan, datasets)?;
    let groups: Vec<Vec<usize>> = match plan.scope {
        Scope::Local => (0..datasets.len()).map(|i| vec![i]).collect(),
        Scope::Global => vec![(0..datasets.len()).collect()],
    };
    let mut units = Vec::new();
    for (m, spec) in plan.models.iter().enumerate() {
        let reps = if spec.is_deterministic() { 1 } else { plan.repetitions };
        for repetition in 0..reps {
            for group in &groups {
                for block in 0..blocks.len() {
                    units.push(Unit {
                        model: m,
                        repetition,
                        group: group.clone(),
                        block,
                    });
                }
            }
        }
    }
    let outputs = par::map(plan.execution, units, |unit| {
        let out = run_unit(plan, datasets, &blocks[unit.block], &unit, observer);
        (unit, out)
    });

    // (model, repetition, series) -> blocks in order
    let mut collected: BTreeMap<(usize, u32, usize), Vec<SeriesBlock>> = BTreeMap::new();
    for (unit, out) in outputs {
        for sb in out? {
            collected.entry((unit.model, unit.repetition, sb.series)).or_default().push(sb);
        }
    }
    let mut results = Vec::new();
    for (m, spec) in plan.models.iter().enumerate() {
        for (s, ds) in datasets.iter().enumerate() {
            for repetition in 0..plan.repetitions {
                let source_rep = if spec.is_deterministic() { 0 } else { repetition };
                let parts = collected.get(&(m, source_rep, s)).map(Vec::as_slice).unwrap_or(&[]);
                let mut predictions: Vec<Prediction> = parts.iter().flat_map(|p| p.predictions.iter().cloned()).collect();
                let scales: Vec<f64> = parts.iter().filter(|p| !p.predictions.is_empty()).filter_map(|p| p.scale).collect();
                let report = evaluate(spec, &mut predictions, &scales);
                results.push(RunResult {
                    model_name: spec.name().to_string(),
                    series_id: ds.series_id().to_string(),
                    scope: plan.scope,
                    repetition,
                    seed: plan.seed_for(repetition),
                    report,
                    predictions,
                });
            }
        }
    }
    Ok(results)
}

fn with_seed(cfg: &LearnerConfig, seed: u64) -> LearnerConfig {
    cfg.clone().with_seed(seed)
}

fn run_unit(
    plan: &ExperimentPlan,
    datasets: &[TimeSeriesDataset],
    block: &Block,
    unit: &Unit,
    observer: Option<&dyn FitObserver>,
) -> Result<Vec<SeriesBlock>, HarnessError> {
    let spec = &plan.models[unit.model];
    let k = datasets.len();
    let design = |s: usize, rows: Matrix| match plan.scope {
        Scope::Local => rows,
        Scope::Global => with_series_block(&rows, s, k),
    };

    let mut train_parts = Vec::new();
    let mut train_y = Vec::new();
    let mut train_end = DateTime::<Utc>::MIN_UTC;
    let mut tests = Vec::new();
    for &s in &unit.group {
        let ds = &datasets[s];
        let ts = ds.timestamps();
        let n_train = ts.partition_point(|t| *t <= block.cutoff);
        let lo = ts.partition_point(|t| *t < block.start);
        let hi = ts.partition_point(|t| *t < block.end);
        train_parts.push(design(s, ds.features().slice_rows(0, n_train)));
        train_y.extend_from_slice(&ds.targets()[..n_train]);
        train_end = train_end.max(ts[n_train - 1]);
        let scale = naive_scale(&ds.targets()[..n_train]).ok();
        tests.push((s, lo, hi, design(s, ds.features().slice_rows(lo, hi)), scale));
    }
    let mut x_train = Matrix::vstack(&train_parts.iter().collect::<Vec<_>>()).map_err(|e| HarnessError::Planning(e.to_string()))?;
    if plan.scale_features {
        let state = fit_scaler(&x_train)?;
        x_train = apply_scaler(&state, &x_train)?;
        for t in &mut tests {
            t.3 = apply_scaler(&state, &t.3)?;
        }
    }
    if let Some(obs) = observer {
        obs.on_fit(&FitEvent {
            model: spec.name().to_string(),
            repetition: unit.repetition,
            series: unit.group.iter().map(|&s| datasets[s].series_id().to_string()).collect(),
            block_start: block.start,
            train_end,
            n_rows: x_train.nrows(),
        });
    }
    let seed = plan.seed_for(unit.repetition);
    let fitted = match spec {
        ModelSpec::ZeroPredictor { .. } => Fitted::Zero,
        ModelSpec::Regressor {
            config,
            transform_target: tt,
            ..
        } => {
            let y = if *tt { transform_target(&train_y)? } else { train_y.clone() };
            Fitted::Regressor(fit(&with_seed(config, seed), &x_train, &y, None)?, *tt)
        }
        ModelSpec::TwoFold {
            classifier,
            conditional,
            transform_target: tt,
            ..
        } => {
            let opts = HurdleOptions {
                transform_target: *tt,
                scope: plan.scope,
                ..HurdleOptions::default()
            };
            let (c, r) = (with_seed(classifier, seed), with_seed(conditional, seed));
            Fitted::TwoFold(fit_hurdle_with(&c, &r, &x_train, &x_train, &train_y, &opts)?)
        }
    };

    let horizon = Duration::hours(i64::from(plan.horizon_hours));
    let mut out = Vec::with_capacity(tests.len());
    for (s, lo, hi, x_test, scale) in tests {
        let ds = &datasets[s];
        let n = hi - lo;
        let (prob, combined, threshold) = match &fitted {
            Fitted::Zero => (vec![0.0; n], vec![0.0; n], None),
            Fitted::Regressor(model, tt) => {
                let raw = model.predict(&x_test)?;
                let values = if *tt { inverse_transform_target(&raw) } else { raw };
                (vec![0.0; n], values, None)
            }
            Fitted::TwoFold(model) => {
                let o = predict_hurdle(model, &x_test)?;
                (o.occurrence_prob, o.combined, Some(model.threshold))
            }
        };
        let mut predictions = Vec::with_capacity(n);
        for i in 0..n {
            let timestamp = ds.timestamps()[lo + i];
            if train_end > timestamp - horizon {
                return Err(HarnessError::Leakage {
                    model: spec.name().to_string(),
                    timestamp,
                    train_end,
                    horizon_hours: plan.horizon_hours,
                });
            }
            predictions.push(Prediction {
                timestamp,
                actual: ds.targets()[lo + i],
                occurrence_prob: prob[i],
                combined: combined[i],
                predicted_occurrence: threshold.is_some_and(|t| prob[i] >= t),
                threshold,
                train_end,
            });
        }
        out.push(SeriesBlock {
            series: s,
            predictions,
            scale,
        });
    }
    Ok(out)
}

fn auc_or_none(scores: &[f64], labels: &[bool]) -> Option<f64> {
    auc_roc(scores, labels).ok()
}

/// Builds the report for one run and, for plain models, fills in the
/// attributed occurrence of the best strategy.
fn evaluate(spec: &ModelSpec, predictions: &mut [Prediction], scales: &[f64]) -> EvaluationReport {
    let actual: Vec<f64> = predictions.iter().map(|p| p.actual).collect();
    let combined: Vec<f64> = predictions.iter().map(|p| p.combined).collect();
    let labels: Vec<bool> = actual.iter().map(|&a| a != 0.0).collect();
    let mut notes = Vec::new();

    let mut auc_by_strategy: Vec<(AucStrategy, Option<f64>)> = Vec::new();
    if spec.is_two_fold() {
        let probs: Vec<f64> = predictions.iter().map(|p| p.occurrence_prob).collect();
        auc_by_strategy.push((AucStrategy::Probability, auc_or_none(&probs, &labels)));
    }
    for a in Attribution::ALL {
        let s = AucStrategy::from(a);
        auc_by_strategy.push((s, auc_or_none(&s.scores(&combined), &labels)));
    }
    let (auc_strategy, auc_roc) = if spec.is_two_fold() {
        auc_by_strategy[0]
    } else {
        auc_by_strategy
            .iter()
            .copied()
            .fold((AucStrategy::Floor, None), |best, (s, v)| match (best.1, v) {
                (_, None) => best,
                (None, Some(_)) => (s, v),
                (Some(b), Some(x)) if x > b => (s, v),
                _ => best,
            })
    };
    if auc_roc.is_none() {
        notes.push("AUC ROC undefined: test labels contain a single class".to_string());
    }

    if !spec.is_two_fold() {
        let attribution = match auc_strategy {
            AucStrategy::Round => Attribution::Round,
            AucStrategy::Ceil => Attribution::Ceil,
            _ => Attribution::Floor,
        };
        let zero = matches!(spec, ModelSpec::ZeroPredictor { .. });
        for p in predictions.iter_mut() {
            p.predicted_occurrence = !zero && attribution.occurs(p.combined);
            p.occurrence_prob = f64::from(u8::from(p.predicted_occurrence));
        }
    }
    let occurrence: Vec<bool> = predictions.iter().map(|p| p.predicted_occurrence).collect();

    let pooled_scale = if scales.is_empty() {
        notes.push("naive scale undefined for every refit".to_string());
        0.0
    } else {
        scales.iter().sum::<f64>() / scales.len() as f64
    };
    let (mase_1, mase_2, n_1, n_2) = match mase_variants(&actual, &combined, &occurrence, pooled_scale) {
        Ok(v) => {
            if let Some(reason) = &v.absent_reason {
                notes.push(reason.clone());
            }
            (v.mase_1, v.mase_2, v.n_1, v.n_2)
        }
        Err(e) => {
            notes.push(format!("MASE unavailable: {e}"));
            let n_1 = labels.iter().filter(|&&l| l).count();
            let n_2 = labels.iter().zip(&occurrence).filter(|(l, o)| **l || **o).count();
            (None, None, n_1, n_2)
        }
    };
    notes.push("MASE pools absolute errors over refits and divides by the mean per-refit naive scale".to_string());

    let truth: Vec<usize> = labels.iter().map(|&l| usize::from(l)).collect();
    let predicted: Vec<usize> = occurrence.iter().map(|&o| usize::from(o)).collect();
    let classification = (!predictions.is_empty()).then(|| confusion_metrics_with_labels(&predicted, &truth, &[0, 1]));

    EvaluationReport {
        auc_roc,
        auc_strategy,
        auc_by_strategy,
        mase_1,
        mase_2,
        n_eval_points_1: n_1,
        n_eval_points_2: n_2,
        naive_scale: pooled_scale,
        classification,
        notes,
    }
}
