//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use chrono::{Duration as Hours, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twofold::data::TimeSeriesDataset;
use twofold::features::{build_calendar_features, inverse_transform_target, recurrence_plot, transform_target, CalendarFeatureConfig};
use twofold::harness::appliance::{run_appliance_experiment, ApplianceConfig};
use twofold::harness::benchmark::{default_model_specs, run_benchmark_observed, synthetic_benchmark_datasets, SyntheticProfile, TWO_FOLD_NAME};
use twofold::harness::{
    compare_models, rolling_origin_evaluate, ExperimentPlan, FitEvent, FitObserver, HarnessError, MetricSelector, ModelSpec, RunResult, Verdict,
};
use twofold::hurdle::{conditional_values, fit_hurdle, gate, predict_hurdle, HurdleMode, Scope};
use twofold::learners::{fit, loss_and_gradient, LearnerConfig, MlpNet, Task};
use twofold::metrics::{auc_roc, mase, mase_variants, naive_scale, tec, wilcoxon_signed_rank, AucStrategy, CostModel, A100_FP64_FLOPS_PER_WATT};
use twofold::par::Execution;
use twofold::Matrix;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Line {
    id: &'static str,
    title: &'static str,
    limit: Option<Duration>,
}

fn run(line: Line, f: impl FnOnce() -> Check) -> (bool, Duration) {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    report(&line, out, elapsed)
}

fn report(line: &Line, out: Check, elapsed: Duration) -> (bool, Duration) {
    let over = line.limit.filter(|l| elapsed > *l);
    let (ok, detail) = match (out, over) {
        (Ok(d), None) => (true, d),
        (Ok(d), Some(l)) => (false, format!("{d}; runtime over the {:.0} s limit", l.as_secs_f64())),
        (Err(e), _) => (false, e),
    };
    let limit = line.limit.map_or("shared".to_string(), |l| format!("{:.0} s", l.as_secs_f64()));
    println!(
        "criterion {} {} {} ({:.2} s, limit {limit}): {detail}",
        line.id,
        if ok { "PASS" } else { "FAIL" },
        line.title,
        elapsed.as_secs_f64()
    );
    (ok, elapsed)
}

// 1

fn tec_reproduction() -> Check {
    let total = |n: u64| {
        tec(&CostModel {
            flops_per_prediction: 13.3e9,
            flops_per_watt: A100_FP64_FLOPS_PER_WATT,
            n_predictions: n,
        })
        .map(|t| t.total_joules / 1e3)
        .map_err(|e| e.to_string())
    };
    let all = total(1_275_508)?;
    let active = total(319_830)?;
    ensure((all / 437.2 - 1.0).abs() <= 0.005, || format!("{all:.3} kJ is not within 0.5% of 437.2 kJ"))?;
    ensure((active / 109.6 - 1.0).abs() <= 0.005, || format!("{active:.3} kJ is not within 0.5% of 109.6 kJ"))?;
    let ratio = all / active;
    ensure((3.9..=4.1).contains(&ratio), || format!("ratio {ratio:.4} outside [3.9, 4.1]"))?;
    Ok(format!("{all:.2} kJ and {active:.2} kJ, ratio {ratio:.3}"))
}

// 2

fn pair_count_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &li) in labels.iter().enumerate() {
        for (j, &lj) in labels.iter().enumerate() {
            if li && !lj {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

fn midranks_by_sorting(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&v| {
            let below = values.iter().filter(|&&u| u < v).count() as f64;
            let equal = values.iter().filter(|&&u| u == v).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Two-sided p from enumerating all 2^n sign assignments.
fn enumerated_wilcoxon_p(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let ranks = midranks_by_sorting(&d.iter().map(|v| v.abs()).collect::<Vec<_>>());
    let observed: f64 = ranks.iter().zip(&d).filter(|(_, v)| **v > 0.0).map(|(r, _)| r).sum();
    let n = d.len();
    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if w <= observed + 1e-9 {
            le += 1;
        }
        if w >= observed - 1e-9 {
            ge += 1;
        }
    }
    (2.0 * le.min(ge) as f64 / (1u64 << n) as f64).min(1.0)
}

fn metric_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_auc = 0.0f64;
    for instance in 0..200 {
        let n = rng.gen_range(2..120);
        // half the instances draw from a small grid to force ties
        let tied = instance % 2 == 0;
        let mut labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
        labels[0] = true;
        labels[1] = false;
        let scores: Vec<f64> = (0..n)
            .map(|_| if tied { f64::from(rng.gen_range(0..5)) / 4.0 } else { rng.gen::<f64>() })
            .collect();
        let got = auc_roc(&scores, &labels).map_err(|e| e.to_string())?;
        worst_auc = worst_auc.max((got - pair_count_auc(&scores, &labels)).abs());
    }
    ensure(worst_auc <= 1e-12, || format!("AUC differs from pair counting by {worst_auc:e}"))?;

    let mut worst_p = 0.0f64;
    let mut checked = 0;
    while checked < 100 {
        let n = rng.gen_range(1..=10);
        let a: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..6))).collect();
        let b: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..6))).collect();
        let Ok(w) = wilcoxon_signed_rank(&a, &b) else { continue };
        ensure(w.exact, || "exact distribution not used for n <= 10".into())?;
        worst_p = worst_p.max((w.p_value - enumerated_wilcoxon_p(&a, &b)).abs());
        checked += 1;
    }
    ensure(worst_p <= 1e-12, || format!("Wilcoxon p differs from enumeration by {worst_p:e}"))?;
    Ok(format!("200 AUC instances (max error {worst_auc:.1e}), 100 Wilcoxon instances (max error {worst_p:.1e})"))
}

// 3

fn mase_suite() -> Check {
    let scale = naive_scale(&[0.0, 2.0, 0.0, 4.0]).map_err(|e| e.to_string())?;
    let value = mase(&[3.0], &[1.5], scale).map_err(|e| e.to_string())?;
    ensure((scale - 8.0 / 3.0).abs() <= 1e-12 && (value - 0.5625).abs() <= 1e-12, || {
        format!("hand example gave scale {scale}, MASE {value}")
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let train: Vec<f64> = (0..50).map(|_| f64::from(rng.gen_range(0..8))).collect();
    let actual: Vec<f64> = (0..20).map(|_| f64::from(rng.gen_range(0..8))).collect();
    let pred: Vec<f64> = (0..20).map(|_| rng.gen_range(0.0..8.0)).collect();
    let base = mase(&actual, &pred, naive_scale(&train).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    for _ in 0..20 {
        let c = rng.gen_range(1e-3..1e3);
        let scaled = |v: &[f64]| v.iter().map(|x| x * c).collect::<Vec<_>>();
        let s = naive_scale(&scaled(&train)).map_err(|e| e.to_string())?;
        let m = mase(&scaled(&actual), &scaled(&pred), s).map_err(|e| e.to_string())?;
        ensure((m - base).abs() <= 1e-9 * base.max(1.0), || format!("rescaling by {c} moved MASE from {base} to {m}"))?;
    }

    for _ in 0..100 {
        let n = rng.gen_range(5..60);
        let actual: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.6) { 0.0 } else { f64::from(rng.gen_range(1..10)) }).collect();
        let oracle: Vec<bool> = actual.iter().map(|&a| a != 0.0).collect();
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..10.0)).collect();
        let probs: Vec<f64> = oracle.iter().map(|&o| if o { 1.0 } else { 0.0 }).collect();
        let combined = gate(&probs, &values, 0.5);
        let v = mase_variants(&actual, &combined, &oracle, rng.gen_range(0.5..3.0)).map_err(|e| e.to_string())?;
        ensure(v.mase_1 == v.mase_2 && v.n_1 == v.n_2, || format!("oracle occurrence gave {:?} vs {:?}", v.mase_1, v.mase_2))?;
    }
    Ok(format!("hand example scale {scale:.6}, MASE {value}; 20 rescalings; 100 oracle-gated evaluations"))
}

// 4

fn relative_gradient_error(task: Task, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, d) = (20, 5);
    let x = Matrix::from_vec(n, d, (0..n * d).map(|_| rng.gen_range(-2.0..2.0)).collect()).expect("shape");
    let y: Vec<f64> = (0..n)
        .map(|_| match task {
            Task::Regression => rng.gen_range(-3.0..3.0),
            Task::BinaryClassification => f64::from(u8::from(rng.gen_bool(0.5))),
        })
        .collect();
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    let alpha = 1e-4;
    let mut net = MlpNet::random(d, 7, seed);
    let (_, grad) = loss_and_gradient(&net, &x, &y, &w, task, alpha);
    let p0 = net.params();
    let h = 1e-5;
    let mut numeric = vec![0.0; p0.len()];
    for k in 0..p0.len() {
        let mut p = p0.clone();
        p[k] = p0[k] + h;
        net.set_params(&p);
        let up = loss_and_gradient(&net, &x, &y, &w, task, alpha).0;
        p[k] = p0[k] - h;
        net.set_params(&p);
        let down = loss_and_gradient(&net, &x, &y, &w, task, alpha).0;
        numeric[k] = (up - down) / (2.0 * h);
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = grad.iter().zip(&numeric).map(|(a, b)| a - b).collect();
    norm(&diff) / norm(&grad).max(norm(&numeric)).max(1e-12)
}

fn learner_numerics() -> Check {
    let mut worst_grad = 0.0f64;
    for task in [Task::Regression, Task::BinaryClassification] {
        for seed in 0..20 {
            worst_grad = worst_grad.max(relative_gradient_error(task, seed));
        }
    }
    ensure(worst_grad < 1e-4, || format!("MLP gradient relative error {worst_grad:e}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for dataset in 0..10 {
        let (n, d) = (rng.gen_range(200..600), rng.gen_range(1..6));
        let x = Matrix::from_vec(n, d, (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect()).expect("shape");
        let y: Vec<f64> = x.rows_iter().map(|r| r.iter().map(|v| v.sin()).sum::<f64>() + rng.gen_range(-0.3..0.3)).collect();
        let model = fit(&LearnerConfig::hgb(Task::Regression), &x, &y, None).map_err(|e| e.to_string())?;
        let t = &model.training_loss_trace;
        ensure(t.len() == 101, || format!("dataset {dataset}: trace has {} entries", t.len()))?;
        if let Some(i) = (1..t.len()).find(|&i| t[i] > t[i - 1]) {
            return Err(format!("dataset {dataset}: HGB loss rose at iteration {i}: {} -> {}", t[i - 1], t[i]));
        }
    }

    // third column duplicates the first, fourth is their sum
    let rows: Vec<Vec<f64>> = (0..40)
        .map(|_| {
            let a = rng.gen_range(-5.0..5.0);
            let b = rng.gen_range(-5.0..5.0);
            vec![a, b, a, a + b]
        })
        .collect();
    let x = Matrix::from_rows(&rows).expect("shape");
    let y: Vec<f64> = rows.iter().map(|r| 1.5 - 2.0 * r[0] + 0.5 * r[1]).collect();
    let model = fit(&LearnerConfig::linear(), &x, &y, None).map_err(|e| e.to_string())?;
    let pred = model.predict(&x).map_err(|e| e.to_string())?;
    let worst_lin = pred.iter().zip(&y).map(|(p, t)| (p - t).abs()).fold(0.0, f64::max);
    ensure(worst_lin <= 1e-8, || format!("linear regression residual {worst_lin:e} on collinear data"))?;
    Ok(format!(
        "gradient error {worst_grad:.1e} over 40 checks; 10 monotone HGB traces; collinear residual {worst_lin:.1e}"
    ))
}

// 5 and 6

struct LeakWatch {
    horizon: Hours,
    fits: Mutex<(usize, Vec<String>)>,
}

impl FitObserver for LeakWatch {
    fn on_fit(&self, e: &FitEvent) {
        let mut g = self.fits.lock().expect("observer lock");
        g.0 += 1;
        if e.train_end > e.block_start - self.horizon {
            g.1.push(format!("{} trained to {} for block {}", e.model, e.train_end, e.block_start));
        }
    }
}

/// Distinct two-fold minus zero-predictor AUC differences. Deterministic
/// learners repeat the same fit in every repetition, so this is the
/// effective number of independent pairs behind the signed-rank test.
fn distinct_differences(results: &[RunResult]) -> usize {
    let auc = |model: &str, series: &str, rep: u32| {
        results
            .iter()
            .find(|r| r.model_name == model && r.series_id == series && r.repetition == rep)
            .and_then(|r| r.report.auc_roc)
    };
    let mut diffs: Vec<u64> = results
        .iter()
        .filter(|r| r.model_name == TWO_FOLD_NAME)
        .filter_map(|r| Some((auc(TWO_FOLD_NAME, &r.series_id, r.repetition)? - auc("Zero Predictor", &r.series_id, r.repetition)?).to_bits()))
        .collect();
    diffs.sort_unstable();
    diffs.dedup();
    diffs.len()
}

fn hurdle_behavior(results: &[RunResult], comparisons: &[(Scope, Verdict, Option<f64>, usize)]) -> Check {
    let mut lines = Vec::new();
    for scope in [Scope::Local, Scope::Global] {
        for series in ["series_1", "series_2", "series_3"] {
            let aucs = |model: &str| -> Vec<f64> {
                results
                    .iter()
                    .filter(|r| r.scope == scope && r.series_id == series && r.model_name == model)
                    .filter_map(|r| r.report.auc_for(AucStrategy::Probability).or(r.report.auc_roc))
                    .collect()
            };
            let two = aucs(TWO_FOLD_NAME);
            let zero = aucs("Zero Predictor");
            ensure(two.len() == 20 && zero.len() == 20, || format!("{series}: expected 20 runs per model"))?;
            let mean = two.iter().sum::<f64>() / two.len() as f64;
            let zmean = zero.iter().sum::<f64>() / zero.len() as f64;
            ensure(mean >= 0.80, || format!("{} {series}: two-fold AUC {mean:.4} < 0.80", scope.label()))?;
            ensure(mean > zmean, || format!("{} {series}: two-fold AUC {mean:.4} not above zero predictor {zmean:.4}", scope.label()))?;
            lines.push(format!("{mean:.3}"));
        }
    }

    let mut applicable = 0;
    for r in results.iter().filter(|r| r.model_name != TWO_FOLD_NAME && r.model_name != "Zero Predictor") {
        if r.predictions.iter().all(|p| p.combined > 0.0) {
            applicable += 1;
            let ceil = r.report.auc_for(AucStrategy::Ceil);
            ensure(ceil == Some(0.5), || format!("{} {}: ceil AUC {ceil:?} with all-positive predictions", r.model_name, r.series_id))?;
        }
    }
    // a regressor that never predicts zero, run through the same harness
    let constant = ceil_on_positive_regressor()?;

    for (scope, verdict, p, _) in comparisons {
        ensure(*verdict == Verdict::Significant && p.is_some_and(|p| p < 0.05), || {
            format!("{}: two-fold vs zero predictor on AUC is {verdict:?} (p = {p:?})", scope.label())
        })?;
    }
    let ps: Vec<String> = comparisons
        .iter()
        .map(|(s, _, p, k)| format!("{} p = {:.2e} ({k} distinct pairs)", s.label(), p.unwrap_or(f64::NAN))).collect();
    Ok(format!(
        "two-fold AUC by scope/series [{}]; ceil AUC 0.5 on {applicable} all-positive benchmark runs and the shifted regressor ({constant}); {}",
        lines.join(", "),
        ps.join(", ")
    ))
}

/// Ceil AUC of a linear regressor trained on targets offset by 100, so it
/// never predicts zero, scored against sparse actuals.
fn ceil_on_positive_regressor() -> Result<String, String> {
    let start = Utc.with_ymd_and_hms(2022, 1, 1, 0, 0, 0).single().expect("date");
    let n = 24 * 75;
    let timestamps: Vec<_> = (0..n).map(|i| start + Hours::hours(i as i64)).collect();
    let actual: Vec<f64> = (0..n).map(|i| if i % 24 < 8 { 0.0 } else { 3.0 + (i % 5) as f64 }).collect();
    let (x, _) = build_calendar_features(&timestamps, &CalendarFeatureConfig::default()).map_err(|e| e.to_string())?;
    let shifted: Vec<f64> = actual.iter().map(|v| v + 100.0).collect();
    let model = fit(&LearnerConfig::linear(), &x, &shifted, None).map_err(|e| e.to_string())?;
    let pred = model.predict(&x).map_err(|e| e.to_string())?;
    ensure(pred.iter().all(|&p| p > 0.0), || "shifted regressor produced a non-positive value".into())?;
    let labels: Vec<bool> = actual.iter().map(|&a| a != 0.0).collect();
    let auc = auc_roc(&AucStrategy::Ceil.scores(&pred), &labels).map_err(|e| e.to_string())?;
    ensure(auc == 0.5, || format!("ceil AUC {auc} for all-positive predictions"))?;
    Ok(format!("ceil AUC {auc}"))
}

fn gate_and_leakage(results: &[RunResult], watch: &LeakWatch, datasets: &[TimeSeriesDataset]) -> Check {
    let horizon = Hours::hours(24);
    let mut gated = 0usize;
    for r in results {
        for p in &r.predictions {
            ensure(p.train_end <= p.timestamp - horizon, || {
                format!("{} {}: trained to {} predicting {}", r.model_name, r.series_id, p.train_end, p.timestamp)
            })?;
            if let Some(t) = p.threshold {
                let open = p.occurrence_prob >= t;
                ensure(open == p.predicted_occurrence && (open || p.combined == 0.0) && p.combined >= 0.0, || {
                    format!("{} {} at {}: gate identity broken", r.model_name, r.series_id, p.timestamp)
                })?;
                gated += 1;
            }
        }
    }
    ensure(gated > 0, || "no gated predictions seen".into())?;
    let fits = {
        let g = watch.fits.lock().expect("observer lock");
        ensure(g.1.is_empty(), || format!("leaking fits: {}", g.1.join("; ")))?;
        g.0
    };
    ensure(fits > 0, || "observer saw no fits".into())?;

    // gate recomputed from the two stages of a fitted model
    let ds = &datasets[0];
    let model = fit_hurdle(
        &LearnerConfig::hgb(Task::BinaryClassification),
        &LearnerConfig::linear(),
        ds,
        HurdleMode::Regression,
    )
    .map_err(|e| e.to_string())?;
    let out = predict_hurdle(&model, ds.features()).map_err(|e| e.to_string())?;
    let values = conditional_values(&model, ds.features()).map_err(|e| e.to_string())?;
    ensure(out.combined == gate(&out.occurrence_prob, &values, model.threshold), || "direct gate recomputation differs".into())?;

    // constructed violation: training data reaching into the horizon
    let leaky = ExperimentPlan {
        repetitions: 1,
        test_span_days: 2,
        training_gap_hours: Some(12),
        models: vec![ModelSpec::regressor("LR", LearnerConfig::linear())],
        ..ExperimentPlan::default()
    };
    match rolling_origin_evaluate(&leaky, &datasets[..1]) {
        Err(HarnessError::Leakage { .. }) => {}
        other => return Err(format!("constructed leak not caught: {:?}", other.map(|r| r.len()))),
    }
    Ok(format!("{gated} gated predictions; {fits} fits within the 24 h cutoff; constructed 12 h gap rejected"))
}

// 7

fn recurrence_and_features() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let n = rng.gen_range(2..80);
        let seg: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let eps = rng.gen_range(0.0..5.0);
        let rp = recurrence_plot(&seg, eps, 64).map_err(|e| e.to_string())?;
        let m = rp.size();
        for i in 0..m {
            ensure(rp.get(i, i), || "diagonal cell not set".into())?;
            for j in 0..i {
                ensure(rp.get(i, j) == rp.get(j, i), || "plot not symmetric".into())?;
            }
        }
    }
    let rp = recurrence_plot(&[0.0, 1.0, 2.0], 1.0, 64).map_err(|e| e.to_string())?;
    let expected = [[1u8, 1, 0], [1, 1, 1], [0, 1, 1]];
    ensure(rp.to_rows() == expected.map(|r| r.to_vec()).to_vec(), || format!("3x3 plot {:?}", rp.to_rows()))?;

    let start = Utc.with_ymd_and_hms(2023, 3, 1, 0, 0, 0).single().expect("date");
    let ts: Vec<_> = (0..24 * 400).map(|i| start + Hours::minutes(37 * i)).collect();
    let cfg = CalendarFeatureConfig::default();
    let (x, names) = build_calendar_features(&ts, &cfg).map_err(|e| e.to_string())?;
    ensure(names.len() == 14 && x.ncols() == 14, || format!("{} calendar features", names.len()))?;
    let mut worst_trig = 0.0f64;
    for (k, name) in names.iter().enumerate().filter(|(_, n)| n.starts_with("sin_")) {
        let c = names.iter().position(|m| *m == name.replacen("sin_", "cos_", 1)).ok_or("missing cosine column")?;
        for r in x.rows_iter() {
            worst_trig = worst_trig.max((r[k] * r[k] + r[c] * r[c] - 1.0).abs());
        }
    }
    ensure(worst_trig <= 1e-12, || format!("sin^2 + cos^2 off by {worst_trig:e}"))?;

    let y: Vec<f64> = (0..1000).map(|_| rng.gen_range(0.0..1e4)).collect();
    let back = inverse_transform_target(&transform_target(&y).map_err(|e| e.to_string())?);
    let worst_rt = y.iter().zip(&back).map(|(a, b)| (a - b).abs() / a.max(1.0)).fold(0.0, f64::max);
    ensure(worst_rt <= 1e-9, || format!("log1p round trip error {worst_rt:e}"))?;
    Ok(format!("1000 random plots; 3x3 plot exact; trig error {worst_trig:.1e}; round trip {worst_rt:.1e}; 14 calendar features"))
}

// 8

fn appliance() -> Check {
    let out = run_appliance_experiment(&ApplianceConfig::default(), Execution::default()).map_err(|e| e.to_string())?;
    let w = out.wilcoxon.as_ref().ok_or("no Wilcoxon result")?;
    ensure(out.runs.len() == 20, || format!("{} repetitions", out.runs.len()))?;
    ensure(out.mean_two_fold_f1 > out.mean_single_stage_f1, || {
        format!("two-fold F1 {:.4} not above single-stage {:.4}", out.mean_two_fold_f1, out.mean_single_stage_f1)
    })?;
    ensure(w.p_value < 0.05, || format!("Wilcoxon p = {:.3e}", w.p_value))?;
    Ok(format!(
        "weighted F1 two-fold {:.4} vs single-stage {:.4}, p = {:.2e}",
        out.mean_two_fold_f1, out.mean_single_stage_f1, w.p_value
    ))
}

fn main() {
    let mut ok = true;
    let mut record = |r: (bool, Duration)| ok &= r.0;
    let secs = Duration::from_secs;

    record(run(Line { id: "1", title: "TEC reproduction", limit: Some(secs(1)) }, tec_reproduction));
    record(run(Line { id: "2", title: "metric oracle equivalence", limit: Some(secs(10)) }, metric_oracles));
    record(run(Line { id: "3", title: "MASE suite", limit: Some(secs(5)) }, mase_suite));
    record(run(Line { id: "4", title: "learner numerics", limit: Some(secs(60)) }, learner_numerics));

    let start = Instant::now();
    let watch = LeakWatch {
        horizon: Hours::hours(24),
        fits: Mutex::new((0, Vec::new())),
    };
    let bench = synthetic_benchmark_datasets(&SyntheticProfile::default()).and_then(|(datasets, _)| {
        let plan = ExperimentPlan {
            models: default_model_specs(false),
            ..ExperimentPlan::default()
        };
        let outcome = run_benchmark_observed(&datasets, &plan, &[Scope::Local, Scope::Global], Some(&watch))?;
        let mut comparisons = Vec::new();
        for scope in [Scope::Local, Scope::Global] {
            let scoped: Vec<RunResult> = outcome.results.iter().filter(|r| r.scope == scope).cloned().collect();
            let c = compare_models(&scoped, TWO_FOLD_NAME, "Zero Predictor", MetricSelector::Auc)?;
            comparisons.push((scope, c.verdict, c.p_value, distinct_differences(&scoped)));
        }
        Ok((datasets, outcome.results, comparisons))
    });
    let bench_time = start.elapsed();
    let five = Line { id: "5", title: "hurdle behavior on the synthetic benchmark", limit: Some(secs(600)) };
    let six = Line { id: "6", title: "gate and leakage invariants", limit: None };
    match bench {
        Ok((datasets, results, comparisons)) => {
            let t = Instant::now();
            let out = hurdle_behavior(&results, &comparisons);
            record(report(&five, out, bench_time + t.elapsed()));
            let t = Instant::now();
            let out = gate_and_leakage(&results, &watch, &datasets);
            record(report(&six, out, t.elapsed()));
        }
        Err(e) => {
            record(report(&five, Err(format!("benchmark failed: {e}")), bench_time));
            record(report(&six, Err(format!("benchmark failed: {e}")), Duration::ZERO));
        }
    }

    record(run(Line { id: "7", title: "recurrence and feature suite", limit: Some(secs(10)) }, recurrence_and_features));
    record(run(Line { id: "8", title: "two-fold classification improvement", limit: Some(secs(600)) }, appliance));

    if !ok {
        std::process::exit(1);
    }
}
