//! Synthetic multi-series benchmark: calendar-modulated zero-inflated
//! Poisson demand, aggregated to buckets, with calendar features, run
//! through the rolling-origin harness for each scope.

use chrono::{DateTime, Duration, Months, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    compare_models, results_table, rolling_origin_evaluate_observed, Comparison, ExperimentPlan, FitObserver, HarnessError, MetricSelector, ModelSpec,
    RunResult,
};
use crate::data::{aggregate, generate_zip_series_from, CalendarProfile, TimeSeriesDataset, ZipParams};
use crate::features::{build_calendar_features, CalendarFeatureConfig};
use crate::hurdle::Scope;
use crate::learners::{LearnerConfig, Task};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticProfile {
    pub n_series: usize,
    pub start: DateTime<Utc>,
    pub years: u32,
    pub bucket_hours: u32,
    /// Target zero fraction of the bucketed series, drawn per series.
    pub sparsity_range: (f64, f64),
    /// Hourly structural-zero probability shared by all series; the base
    /// rate is calibrated per series to reach its target sparsity.
    pub pi: f64,
    pub calendar: CalendarProfile,
    pub seed: u64,
}

impl Default for SyntheticProfile {
    fn default() -> Self {
        Self {
            n_series: 3,
            start: Utc.with_ymd_and_hms(2019, 1, 1, 0, 0, 0).single().expect("valid date"),
            years: 4,
            bucket_hours: 3,
            sparsity_range: (0.5, 0.85),
            pi: 0.1,
            calendar: CalendarProfile::shuttle(),
            seed: 42,
        }
    }
}

/// Generation parameters chosen for one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSeries {
    pub series_id: String,
    pub target_sparsity: f64,
    pub expected_sparsity: f64,
    pub pi: f64,
    pub lambda: f64,
    pub seed: u64,
}

/// Expected zero fraction of bucket sums over one calendar week.
pub fn expected_bucket_sparsity(pi: f64, lambda: f64, calendar: &CalendarProfile, bucket_hours: u32) -> f64 {
    // 2019-01-07 is a Monday; the profile repeats weekly
    let monday = Utc.with_ymd_and_hms(2019, 1, 7, 0, 0, 0).single().expect("valid date");
    let b = bucket_hours as usize;
    let buckets = 168 / b;
    (0..buckets)
        .map(|k| {
            (0..b)
                .map(|h| {
                    let t = monday + Duration::hours((k * b + h) as i64);
                    pi + (1.0 - pi) * (-lambda * calendar.multiplier(t)).exp()
                })
                .product::<f64>()
        })
        .sum::<f64>()
        / buckets as f64
}

/// Base hourly rate giving the target bucket sparsity under a fixed
/// structural-zero probability, by bisection on a log scale.
pub fn calibrate_lambda(target: f64, pi: f64, calendar: &CalendarProfile, bucket_hours: u32) -> Result<f64, HarnessError> {
    let (mut lo, mut hi) = (1e-6_f64, 1e3_f64);
    // sparsity falls as the rate grows; the bracket must straddle the target
    if expected_bucket_sparsity(pi, hi, calendar, bucket_hours) > target || expected_bucket_sparsity(pi, lo, calendar, bucket_hours) < target {
        return Err(HarnessError::Config(format!("sparsity {target} is unreachable with pi = {pi} and this calendar")));
    }
    for _ in 0..100 {
        let mid = (lo * hi).sqrt();
        if expected_bucket_sparsity(pi, mid, calendar, bucket_hours) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

/// Adds the calendar feature table to a dataset.
pub fn with_calendar_features(ds: TimeSeriesDataset, config: &CalendarFeatureConfig) -> Result<TimeSeriesDataset, HarnessError> {
    let (x, names) = build_calendar_features(ds.timestamps(), config)?;
    Ok(ds.with_features(x, names)?)
}

/// Bucketed series with calendar features, plus how each was generated.
pub fn synthetic_benchmark_datasets(profile: &SyntheticProfile) -> Result<(Vec<TimeSeriesDataset>, Vec<SyntheticSeries>), HarnessError> {
    if profile.n_series == 0 || profile.years == 0 {
        return Err(HarnessError::Config("profile needs at least one series and one year".into()));
    }
    let (s0, s1) = profile.sparsity_range;
    if !(0.0 < s0 && s0 <= s1 && s1 < 1.0) || !(0.0..1.0).contains(&profile.pi) {
        return Err(HarnessError::Config("invalid sparsity range or structural-zero probability".into()));
    }
    let end = profile
        .start
        .checked_add_months(Months::new(12 * profile.years))
        .ok_or_else(|| HarnessError::Config("profile end date out of range".into()))?;
    let hours = (end - profile.start).num_hours() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    let calendar_cfg = CalendarFeatureConfig::default();
    let mut datasets = Vec::with_capacity(profile.n_series);
    let mut info = Vec::with_capacity(profile.n_series);
    for i in 0..profile.n_series {
        let target = rng.gen_range(s0..=s1);
        let seed = rng.gen::<u64>();
        let pi = profile.pi;
        let lambda = calibrate_lambda(target, pi, &profile.calendar, profile.bucket_hours)?;
        let series_id = format!("series_{}", i + 1);
        let params = ZipParams::new(pi, lambda, seed)?;
        let hourly = generate_zip_series_from(&params, hours, Some(&profile.calendar), profile.start, Duration::hours(1), &series_id)?;
        let bucketed = aggregate(&hourly, profile.bucket_hours)?;
        datasets.push(with_calendar_features(bucketed, &calendar_cfg)?);
        info.push(SyntheticSeries {
            series_id,
            target_sparsity: target,
            expected_sparsity: expected_bucket_sparsity(pi, lambda, &profile.calendar, profile.bucket_hours),
            pi,
            lambda,
            seed,
        });
    }
    Ok((datasets, info))
}

pub const TWO_FOLD_NAME: &str = "Two-fold HGB+LR";

/// Zero predictor, plain regressors on all values and two-fold models.
pub fn default_model_specs(with_mlp: bool) -> Vec<ModelSpec> {
    let mut specs = vec![
        ModelSpec::zero(),
        ModelSpec::regressor("LR", LearnerConfig::linear()),
        ModelSpec::regressor("HGB", LearnerConfig::hgb(Task::Regression)),
        ModelSpec::two_fold(TWO_FOLD_NAME, LearnerConfig::hgb(Task::BinaryClassification), LearnerConfig::linear()),
    ];
    if with_mlp {
        specs.push(ModelSpec::regressor("MLP", LearnerConfig::mlp(Task::Regression)));
        specs.push(ModelSpec::two_fold(
            "Two-fold HGB+MLP",
            LearnerConfig::hgb(Task::BinaryClassification),
            LearnerConfig::mlp(Task::Regression),
        ));
    }
    specs
}

#[derive(Debug, Clone)]
pub struct BenchmarkOutcome {
    pub results: Vec<RunResult>,
    pub comparisons: Vec<Comparison>,
    pub table: String,
}

/// Runs `plan` once per scope and compares every two-fold model with every
/// other model on AUC ROC and MASE_I, within each scope.
pub fn run_benchmark(datasets: &[TimeSeriesDataset], plan: &ExperimentPlan, scopes: &[Scope]) -> Result<BenchmarkOutcome, HarnessError> {
    run_benchmark_observed(datasets, plan, scopes, None)
}

pub fn run_benchmark_observed(
    datasets: &[TimeSeriesDataset],
    plan: &ExperimentPlan,
    scopes: &[Scope],
    observer: Option<&dyn FitObserver>,
) -> Result<BenchmarkOutcome, HarnessError> {
    let mut results = Vec::new();
    let mut comparisons = Vec::new();
    for &scope in scopes {
        let scoped_plan = ExperimentPlan { scope, ..plan.clone() };
        let scoped = rolling_origin_evaluate_observed(&scoped_plan, datasets, observer)?;
        for a in plan.models.iter().filter(|m| m.is_two_fold()) {
            for b in plan.models.iter().filter(|m| m.name() != a.name()) {
                for metric in [MetricSelector::Auc, MetricSelector::Mase1] {
                    match compare_models(&scoped, a.name(), b.name(), metric) {
                        Ok(c) => comparisons.push(c),
                        Err(HarnessError::Pairing(msg)) => log::warn!("{} scope: skipped comparison: {msg}", scope.label()),
                        Err(e) => return Err(e),
                    }
                }
            }
        }
        results.extend(scoped);
    }
    let table = results_table(&results);
    Ok(BenchmarkOutcome {
        results,
        comparisons,
        table,
    })
}
