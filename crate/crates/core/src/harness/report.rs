use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{ExperimentPlan, HarnessError, RunResult};
use crate::data::TimeSeriesDataset;
use crate::hurdle::Scope;
use crate::metrics::AucStrategy;

/// Mean metrics of one model on one series over its repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub scope: Scope,
    pub series_id: String,
    pub model: String,
    pub repetitions: usize,
    pub auc: Option<f64>,
    pub auc_strategy: AucStrategy,
    pub mase_1: Option<f64>,
    pub mase_2: Option<f64>,
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Groups results by `(scope, series, model)` and averages over repetitions.
pub fn summarize(results: &[RunResult]) -> Vec<ModelSummary> {
    let mut groups: BTreeMap<(Scope, &str, &str), Vec<&RunResult>> = BTreeMap::new();
    for r in results {
        groups.entry((r.scope, &r.series_id, &r.model_name)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((scope, series, model), mut runs)| {
            // input order must not matter
            runs.sort_by_key(|r| r.repetition);
            // most frequent strategy, lowest repetition on ties
            let mut counts: Vec<(AucStrategy, usize)> = Vec::new();
            for r in &runs {
                match counts.iter_mut().find(|(s, _)| *s == r.report.auc_strategy) {
                    Some((_, c)) => *c += 1,
                    None => counts.push((r.report.auc_strategy, 1)),
                }
            }
            let auc_strategy = counts.iter().fold(counts[0], |best, &c| if c.1 > best.1 { c } else { best }).0;
            ModelSummary {
                scope,
                series_id: series.to_string(),
                model: model.to_string(),
                repetitions: runs.len(),
                auc: mean_of(runs.iter().map(|r| r.report.auc_roc)),
                auc_strategy,
                mase_1: mean_of(runs.iter().map(|r| r.report.mase_1)),
                mase_2: mean_of(runs.iter().map(|r| r.report.mase_2)),
            }
        })
        .collect()
}

fn cmp_desc(a: Option<f64>, b: Option<f64>) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

fn cmp_asc(a: Option<f64>, b: Option<f64>) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".to_string(), |x| format!("{x:.4}"))
}

/// Aligned text table per `(scope, series)`: model, best AUC ROC with its
/// strategy, MASE_I and MASE_II. Rows are ranked by AUC (descending), then
/// MASE_I (ascending), then name; the best row is marked `**name**` and
/// the second `_name_`.
pub fn results_table(results: &[RunResult]) -> String {
    let summaries = summarize(results);
    let mut groups: BTreeMap<(Scope, &str), Vec<&ModelSummary>> = BTreeMap::new();
    for s in &summaries {
        groups.entry((s.scope, &s.series_id)).or_default().push(s);
    }
    let mut out = String::new();
    for ((scope, series), mut rows) in groups {
        rows.sort_by(|a, b| {
            cmp_desc(a.auc, b.auc)
                .then(cmp_asc(a.mase_1, b.mase_1))
                .then_with(|| a.model.cmp(&b.model))
        });
        let cells: Vec<[String; 4]> = rows
            .iter()
            .enumerate()
            .map(|(rank, s)| {
                let name = match rank {
                    0 => format!("**{}**", s.model),
                    1 => format!("_{}_", s.model),
                    _ => s.model.clone(),
                };
                let auc = s.auc.map_or("-".to_string(), |a| format!("{a:.4} ({})", s.auc_strategy.label()));
                [name, auc, fmt_opt(s.mase_1), fmt_opt(s.mase_2)]
            })
            .collect();
        let header = ["Model", "Best AUC ROC", "MASE_I", "MASE_II"];
        let mut widths = header.map(str::len);
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let _ = writeln!(out, "series {series} ({} models)", scope.label());
        let line = |cols: [&str; 4]| {
            format!(
                "{:<w0$}  {:>w1$}  {:>w2$}  {:>w3$}",
                cols[0],
                cols[1],
                cols[2],
                cols[3],
                w0 = widths[0],
                w1 = widths[1],
                w2 = widths[2],
                w3 = widths[3]
            )
        };
        let _ = writeln!(out, "{}", line(header));
        for row in &cells {
            let _ = writeln!(out, "{}", line([&row[0], &row[1], &row[2], &row[3]]));
        }
        out.push('\n');
    }
    out
}

/// One CSV row per run.
pub fn write_results_csv<W: Write>(writer: W, results: &[RunResult]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "model", "scope", "series_id", "repetition", "seed", "auc_roc", "auc_strategy", "auc_prob", "auc_floor",
        "auc_round", "auc_ceil", "mase_1", "mase_2", "n_eval_points_1", "n_eval_points_2", "naive_scale",
        "n_predictions",
    ])?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    for r in results {
        let rep = &r.report;
        w.write_record([
            r.model_name.clone(),
            r.scope.label().to_string(),
            r.series_id.clone(),
            r.repetition.to_string(),
            r.seed.to_string(),
            opt(rep.auc_roc),
            rep.auc_strategy.label().to_string(),
            opt(rep.auc_for(AucStrategy::Probability)),
            opt(rep.auc_for(AucStrategy::Floor)),
            opt(rep.auc_for(AucStrategy::Round)),
            opt(rep.auc_for(AucStrategy::Ceil)),
            opt(rep.mase_1),
            opt(rep.mase_2),
            rep.n_eval_points_1.to_string(),
            rep.n_eval_points_2.to_string(),
            rep.naive_scale.to_string(),
            r.predictions.len().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesInfo {
    pub series_id: String,
    pub rows: usize,
    pub first: Option<DateTime<Utc>>,
    pub last: Option<DateTime<Utc>>,
    pub zero_fraction: f64,
    pub feature_names: Vec<String>,
}

impl SeriesInfo {
    pub fn of(ds: &TimeSeriesDataset) -> Self {
        Self {
            series_id: ds.series_id().to_string(),
            rows: ds.len(),
            first: ds.timestamps().first().copied(),
            last: ds.timestamps().last().copied(),
            zero_fraction: ds.zero_fraction(),
            feature_names: ds.feature_names().to_vec(),
        }
    }
}

/// Everything needed to rerun an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub plans: Vec<ExperimentPlan>,
    pub seeds: Vec<u64>,
    pub series: Vec<SeriesInfo>,
    pub notes: Vec<String>,
}

impl Manifest {
    pub fn new(plans: Vec<ExperimentPlan>, datasets: &[TimeSeriesDataset]) -> Self {
        let seeds = plans
            .first()
            .map(|p| (0..p.repetitions).map(|r| p.seed_for(r)).collect())
            .unwrap_or_default();
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            plans,
            seeds,
            series: datasets.iter().map(SeriesInfo::of).collect(),
            notes: Vec::new(),
        }
    }
}

pub fn write_manifest<W: Write>(writer: W, manifest: &Manifest) -> Result<(), HarnessError> {
    serde_json::to_writer_pretty(writer, manifest)?;
    Ok(())
}
