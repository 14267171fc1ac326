use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use twofold::data::{aggregate, generate_zip_series_from, load_csv_grouped, parse_timestamp, write_csv, CalendarProfile, CsvSchema, TimeSeriesDataset, ZipParams};
use twofold::features::{apply_scaler, build_calendar_features, fit_scaler, load_holidays, CalendarFeatureConfig, ScalerState};
use twofold::harness::benchmark::{default_model_specs, run_benchmark, synthetic_benchmark_datasets, with_calendar_features, SyntheticProfile};
use twofold::harness::{results_table, rolling_origin_evaluate, write_manifest, write_results_csv, ExperimentPlan, Manifest, SIGNIFICANCE_LEVEL};
use twofold::hurdle::{fit_hurdle_with, predict_hurdle, HurdleMode, HurdleModel, HurdleOptions, Scope};
use twofold::learners::{LearnerConfig, LearnerKind, Task};
use twofold::metrics::{tec as tec_estimate, CostModel, A100_FP64_FLOPS_PER_WATT};
use twofold::par::Execution;

use crate::config::Config;
use crate::{BenchmarkArgs, Cli, CliError, DataArgs, EvaluateArgs, GenerateArgs, PlanArgs, PredictArgs, TecArgs, TrainArgs};

pub struct Context<'a> {
    pub cfg: &'a Config,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl<'a> Context<'a> {
    pub fn new(cli: &Cli, cfg: &'a Config) -> Result<Self, CliError> {
        Ok(Self {
            cfg,
            seed: cfg.pick(cli.seed, "global", "seed", 42)?,
            output_dir: cfg.pick(cli.output_dir.clone(), "global", "output_dir", PathBuf::from("."))?,
        })
    }

    fn create(&self, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CliError::Io { path, source }
        };
        fs::create_dir_all(&self.output_dir).map_err(io(&self.output_dir))?;
        let path = self.output_dir.join(name);
        let file = File::create(&path).map_err(io(&path))?;
        Ok((path, BufWriter::new(file)))
    }

    fn write_with(&self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> Result<(), CliError>) -> Result<PathBuf, CliError> {
        let (path, mut w) = self.create(name)?;
        body(&mut w)?;
        w.flush().map_err(|source| CliError::Io { path: path.clone(), source })?;
        Ok(path)
    }
}

fn parse_time(raw: &str) -> Result<DateTime<Utc>, CliError> {
    parse_timestamp(raw).ok_or_else(|| CliError::Usage(format!("cannot parse timestamp `{raw}`")))
}

fn calendar_profile(name: &str) -> Result<Option<CalendarProfile>, CliError> {
    match name.to_ascii_lowercase().as_str() {
        "flat" | "none" => Ok(None),
        "commuter" => Ok(Some(CalendarProfile::default())),
        "shuttle" => Ok(Some(CalendarProfile::shuttle())),
        other => Err(CliError::Usage(format!("unknown calendar profile `{other}` (flat, commuter, shuttle)"))),
    }
}

fn parse_scope(name: &str) -> Result<Scope, CliError> {
    match name.to_ascii_lowercase().as_str() {
        "local" => Ok(Scope::Local),
        "global" => Ok(Scope::Global),
        other => Err(CliError::Usage(format!("unknown scope `{other}` (local, global)"))),
    }
}

fn calendar_config(ctx: &Context, data: &DataArgs) -> Result<CalendarFeatureConfig, CliError> {
    let cfg = CalendarFeatureConfig::default();
    Ok(match ctx.cfg.pick_opt(data.holidays.clone(), "data", "holidays")? {
        Some(path) => cfg.with_holidays(load_holidays(path)?),
        None => cfg,
    })
}

/// Reads every series of the input file, buckets it when asked and
/// attaches calendar features.
fn load_series(ctx: &Context, data: &DataArgs, calendar: &CalendarFeatureConfig) -> Result<(Vec<TimeSeriesDataset>, Option<u32>), CliError> {
    let input = ctx
        .cfg
        .pick_opt(data.input.clone(), "data", "input")?
        .ok_or_else(|| CliError::Usage("--input is required".into()))?;
    if !input.is_file() {
        return Err(CliError::Usage(format!("input file {} does not exist", input.display())));
    }
    let mut schema = CsvSchema::new(
        ctx.cfg.pick(data.timestamp_col.clone(), "data", "timestamp_col", "timestamp".to_string())?,
        ctx.cfg.pick(data.target_col.clone(), "data", "target_col", "target".to_string())?,
    );
    schema.series_col = ctx.cfg.pick_opt(data.series_col.clone(), "data", "series_col")?;
    let bucket = ctx.cfg.pick_opt(data.bucket_hours, "data", "bucket_hours")?;
    let mut out = Vec::new();
    for ds in load_csv_grouped(&input, &schema)? {
        let ds = match bucket {
            Some(b) => aggregate(&ds, b)?,
            None => ds,
        };
        out.push(with_calendar_features(ds, calendar)?);
    }
    Ok((out, bucket))
}

pub fn generate(ctx: &Context, a: &GenerateArgs) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let pi = cfg.pick_opt(a.pi, "generate", "pi")?.ok_or_else(|| CliError::Usage("--pi is required".into()))?;
    let lambda = cfg
        .pick_opt(a.lambda, "generate", "lambda")?
        .ok_or_else(|| CliError::Usage("--lambda is required".into()))?;
    let n = cfg.pick(a.n, "generate", "n", 24 * 365)?;
    let calendar = calendar_profile(&cfg.pick(a.calendar.clone(), "generate", "calendar", "flat".to_string())?)?;
    let start = parse_time(&cfg.pick(a.start.clone(), "generate", "start", "2019-01-01T00:00:00Z".to_string())?)?;
    let series_id = cfg.pick(a.series_id.clone(), "generate", "series_id", "synthetic".to_string())?;
    let params = ZipParams::new(pi, lambda, ctx.seed)?;
    let ds = generate_zip_series_from(&params, n, calendar.as_ref(), start, Duration::hours(1), &series_id)?;
    let name = cfg.pick(a.out.clone(), "generate", "out", "synthetic.csv".to_string())?;
    let path = ctx.write_with(&name, |w| Ok(write_csv(w, &[&ds])?))?;
    let mean = ds.targets().iter().sum::<f64>() / ds.len() as f64;
    println!(
        "wrote {}: {} rows, zero fraction {:.4}, mean {:.4}",
        path.display(),
        ds.len(),
        ds.zero_fraction(),
        mean
    );
    Ok(())
}

/// A trained model plus everything needed to rebuild its inputs.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format_version: u32,
    pub series_id: String,
    /// Spacing of consecutive rows, used for `--from`/`--periods` forecasts.
    pub step_hours: u32,
    pub bucket_hours: Option<u32>,
    pub calendar: CalendarFeatureConfig,
    pub scaler: ScalerState,
    pub model: HurdleModel,
}

fn learner(kind: &str, task: Task, seed: u64) -> Result<LearnerConfig, CliError> {
    let kind: LearnerKind = kind.parse()?;
    let config = LearnerConfig::new(kind, task).with_seed(seed);
    config.validate()?;
    Ok(config)
}

pub fn train(ctx: &Context, a: &TrainArgs) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let calendar = calendar_config(ctx, &a.data)?;
    let (mut sets, bucket) = load_series(ctx, &a.data, &calendar)?;
    if sets.len() != 1 {
        return Err(CliError::Usage(format!("train expects a single series, the input holds {}", sets.len())));
    }
    let ds = sets.remove(0);
    let classifier = learner(&cfg.pick(a.classifier.clone(), "train", "classifier", "hgb".to_string())?, Task::BinaryClassification, ctx.seed)?;
    let regressor = learner(&cfg.pick(a.regressor.clone(), "train", "regressor", "linear".to_string())?, Task::Regression, ctx.seed)?;
    let transform = !(a.no_target_transform || cfg.get::<bool>("train", "no_target_transform")?.unwrap_or(false));
    let scaler = fit_scaler(ds.features())?;
    let x = apply_scaler(&scaler, ds.features())?;
    let opts = HurdleOptions {
        mode: HurdleMode::Regression,
        transform_target: transform,
        ..HurdleOptions::default()
    };
    let model = fit_hurdle_with(&classifier, &regressor, &x, &x, ds.targets(), &opts)?;
    let step_hours = match (bucket, ds.timestamps()) {
        (Some(b), _) => b,
        (None, [t0, t1, ..]) => u32::try_from((*t1 - *t0).num_hours()).unwrap_or(1).max(1),
        _ => 1,
    };
    println!(
        "series {}: {} rows, {} non-zero; threshold {:.6} (Youden J {:.4})",
        ds.series_id(),
        model.n_training_rows,
        model.n_conditional_rows,
        model.threshold,
        model.youden_j
    );
    let bundle = ModelBundle {
        format_version: 1,
        series_id: ds.series_id().to_string(),
        step_hours,
        bucket_hours: bucket,
        calendar,
        scaler,
        model,
    };
    let name = cfg.pick(a.model_out.clone(), "train", "model_out", "model.json".to_string())?;
    let path = ctx.write_with(&name, |w| Ok(serde_json::to_writer_pretty(w, &bundle)?))?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn predict(ctx: &Context, a: &PredictArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&a.model).map_err(|source| CliError::Io {
        path: a.model.clone(),
        source,
    })?;
    let bundle: ModelBundle = serde_json::from_str(&text)?;
    let (timestamps, features, actuals) = if a.data.input.is_some() {
        let data = DataArgs {
            bucket_hours: a.data.bucket_hours.or(bundle.bucket_hours),
            ..a.data.clone()
        };
        let (sets, _) = load_series(ctx, &data, &bundle.calendar)?;
        let [ds] = <[TimeSeriesDataset; 1]>::try_from(sets).map_err(|s| CliError::Usage(format!("predict expects a single series, the input holds {}", s.len())))?;
        (ds.timestamps().to_vec(), ds.features().clone(), Some(ds.targets().to_vec()))
    } else {
        let from = a.from.as_deref().ok_or_else(|| CliError::Usage("give --input, or --from with --periods".into()))?;
        let periods = a.periods.ok_or_else(|| CliError::Usage("--periods is required with --from".into()))?;
        let start = parse_time(from)?;
        let ts: Vec<_> = (0..periods)
            .map(|i| start + Duration::hours(i as i64 * i64::from(bundle.step_hours)))
            .collect();
        let (x, _) = build_calendar_features(&ts, &bundle.calendar)?;
        (ts, x, None)
    };
    let x = apply_scaler(&bundle.scaler, &features)?;
    let out = predict_hurdle(&bundle.model, &x)?;
    let name = a.out.clone().unwrap_or_else(|| "predictions.csv".into());
    let path = ctx.write_with(&name, |w| {
        let io = |source| CliError::Io {
            path: PathBuf::from(&name),
            source,
        };
        let header = if actuals.is_some() { ",actual" } else { "" };
        writeln!(w, "timestamp,occurrence_prob,predicted_occurrence,prediction{header}").map_err(io)?;
        for (i, t) in timestamps.iter().enumerate() {
            let p = out.occurrence_prob[i];
            write!(w, "{},{},{},{}", t.to_rfc3339_opts(SecondsFormat::Secs, true), p, u8::from(p >= bundle.model.threshold), out.combined[i]).map_err(io)?;
            if let Some(y) = &actuals {
                write!(w, ",{}", y[i]).map_err(io)?;
            }
            writeln!(w).map_err(io)?;
        }
        Ok(())
    })?;
    println!("wrote {} predictions to {}", timestamps.len(), path.display());
    Ok(())
}

fn plan_from(ctx: &Context, a: &PlanArgs, scope: Scope) -> Result<ExperimentPlan, CliError> {
    let cfg = ctx.cfg;
    let defaults = ExperimentPlan::default();
    let with_mlp = a.with_mlp || cfg.get::<bool>("harness", "with_mlp")?.unwrap_or(false);
    let sequential = a.sequential || cfg.get::<bool>("harness", "sequential")?.unwrap_or(false);
    let plan = ExperimentPlan {
        horizon_hours: cfg.pick(a.horizon_hours, "harness", "horizon_hours", defaults.horizon_hours)?,
        test_span_days: cfg.pick(a.test_span_days, "harness", "test_span_days", defaults.test_span_days)?,
        retrain_cadence_hours: cfg.pick(a.retrain_cadence_hours, "harness", "retrain_cadence_hours", defaults.retrain_cadence_hours)?,
        repetitions: cfg.pick(a.repetitions, "harness", "repetitions", defaults.repetitions)?,
        scope,
        models: default_model_specs(with_mlp),
        seed_base: ctx.seed,
        execution: if sequential { Execution::Sequential } else { Execution::Parallel },
        ..defaults
    };
    plan.validate()?;
    Ok(plan)
}

fn write_outputs(ctx: &Context, results: &[twofold::harness::RunResult], manifest: &Manifest, table: &str) -> Result<(), CliError> {
    let csv = ctx.write_with("results.csv", |w| Ok(write_results_csv(w, results)?))?;
    let man = ctx.write_with("manifest.json", |w| Ok(write_manifest(w, manifest)?))?;
    let tab = ctx.write_with("table.txt", |w| {
        w.write_all(table.as_bytes()).map_err(|source| CliError::Io {
            path: PathBuf::from("table.txt"),
            source,
        })
    })?;
    log::info!("wrote {}, {} and {}", csv.display(), man.display(), tab.display());
    Ok(())
}

pub fn evaluate(ctx: &Context, a: &EvaluateArgs) -> Result<(), CliError> {
    let scope = parse_scope(&ctx.cfg.pick(a.scope.clone(), "harness", "scope", "local".to_string())?)?;
    let plan = plan_from(ctx, &a.plan, scope)?;
    let calendar = calendar_config(ctx, &a.data)?;
    let (datasets, _) = load_series(ctx, &a.data, &calendar)?;
    let results = rolling_origin_evaluate(&plan, &datasets)?;
    let table = results_table(&results);
    print!("{table}");
    write_outputs(ctx, &results, &Manifest::new(vec![plan], &datasets), &table)
}

pub fn benchmark(ctx: &Context, a: &BenchmarkArgs) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let base = plan_from(ctx, &a.plan, Scope::Local)?;
    let use_input = !a.synthetic && (a.data.input.is_some() || cfg.raw("data", "input").is_some());
    let (datasets, notes) = if use_input {
        let calendar = calendar_config(ctx, &a.data)?;
        (load_series(ctx, &a.data, &calendar)?.0, Vec::new())
    } else {
        let defaults = SyntheticProfile::default();
        let profile = SyntheticProfile {
            n_series: cfg.pick(a.series, "benchmark", "series", defaults.n_series)?,
            years: cfg.pick(a.years, "benchmark", "years", defaults.years)?,
            seed: ctx.seed,
            ..defaults
        };
        let (sets, info) = synthetic_benchmark_datasets(&profile)?;
        let mut notes = vec![format!("synthetic profile: {}", serde_json::to_string(&profile)?)];
        for s in &info {
            notes.push(format!("generated series: {}", serde_json::to_string(s)?));
        }
        (sets, notes)
    };
    let scopes = [Scope::Local, Scope::Global];
    let outcome = run_benchmark(&datasets, &base, &scopes)?;
    print!("{}", outcome.table);
    println!("Wilcoxon signed-rank tests (alpha = {SIGNIFICANCE_LEVEL})");
    let mut lines = String::new();
    for c in &outcome.comparisons {
        println!("{}", c.summary_line());
        lines.push_str(&c.summary_line());
        lines.push('\n');
    }
    let plans = scopes.iter().map(|&scope| ExperimentPlan { scope, ..base.clone() }).collect();
    let mut manifest = Manifest::new(plans, &datasets);
    manifest.notes = notes;
    write_outputs(ctx, &outcome.results, &manifest, &format!("{}{lines}", outcome.table))?;
    ctx.write_with("comparisons.json", |w| Ok(serde_json::to_writer_pretty(w, &outcome.comparisons)?))?;
    Ok(())
}

pub fn tec(ctx: &Context, a: &TecArgs) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let flops = cfg.pick_opt(a.flops, "tec", "flops")?.ok_or_else(|| CliError::Usage("--flops is required".into()))?;
    let flops_per_watt = cfg.pick(a.flops_per_watt, "tec", "flops_per_watt", A100_FP64_FLOPS_PER_WATT)?;
    let counts = if a.n.is_empty() {
        cfg.get::<u64>("tec", "n")?.into_iter().collect()
    } else {
        a.n.clone()
    };
    if counts.is_empty() {
        return Err(CliError::Usage("--n is required".into()));
    }
    if counts.contains(&0) {
        return Err(CliError::Usage("prediction counts must be positive".into()));
    }
    let mut totals = Vec::new();
    for &n in &counts {
        let est = tec_estimate(&CostModel {
            flops_per_prediction: flops,
            flops_per_watt,
            n_predictions: n,
        })?;
        println!(
            "n = {n}: {:.6} J per prediction, {:.1} kJ total",
            est.joules_per_prediction,
            est.total_joules / 1e3
        );
        totals.push(est.total_joules);
    }
    if let [first, .., last] = totals[..] {
        println!("ratio first/last = {:.4}", first / last);
    }
    Ok(())
}
