use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime, SecondsFormat, Utc};

use super::{DataError, TimeSeriesDataset};
use crate::matrix::Matrix;

/// Column mapping for CSV ingestion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub timestamp_col: String,
    pub target_col: String,
    /// Column holding the series identifier; `None` means a single series.
    pub series_col: Option<String>,
    pub feature_cols: Vec<String>,
    /// Identifier used when `series_col` is absent.
    pub default_series_id: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            timestamp_col: "timestamp".into(),
            target_col: "target".into(),
            series_col: None,
            feature_cols: Vec::new(),
            default_series_id: "series".into(),
        }
    }
}

impl CsvSchema {
    pub fn new(timestamp_col: impl Into<String>, target_col: impl Into<String>) -> Self {
        Self {
            timestamp_col: timestamp_col.into(),
            target_col: target_col.into(),
            ..Self::default()
        }
    }

    /// Schema matching what [`write_csv`] emits for `feature_names`.
    pub fn canonical(feature_names: &[String]) -> Self {
        Self {
            series_col: Some("series_id".into()),
            feature_cols: feature_names.to_vec(),
            ..Self::default()
        }
    }
}

/// Parses an ISO-8601 instant. Inputs without an offset are taken as UTC;
/// seconds may be omitted.
pub fn parse_timestamp(raw: &str) -> Option<DateTime<Utc>> {
    let s = raw.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M%#z", "%Y-%m-%d %H:%M%#z", "%Y-%m-%d %H:%M:%S%#z"] {
        if let Ok(dt) = DateTime::parse_from_str(s, fmt) {
            return Some(dt.with_timezone(&Utc));
        }
    }
    let naive = s.strip_suffix('Z').unwrap_or(s);
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%d %H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(naive, fmt) {
            return Some(dt.and_utc());
        }
    }
    NaiveDate::parse_from_str(naive, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|dt| dt.and_utc())
}

struct Row {
    line: u64,
    series: String,
    timestamp: DateTime<Utc>,
    target: f64,
    features: Vec<f64>,
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize, DataError> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| DataError::MissingColumn(name.to_string()))
}

fn parse_rows<R: Read>(reader: R, schema: &CsvSchema) -> Result<Vec<Row>, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let ts_idx = column_index(&headers, &schema.timestamp_col)?;
    let target_idx = column_index(&headers, &schema.target_col)?;
    let series_idx = schema.series_col.as_deref().map(|c| column_index(&headers, c)).transpose()?;
    let feature_idx = schema
        .feature_cols
        .iter()
        .map(|c| column_index(&headers, c))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |idx: usize| -> Result<&str, DataError> {
            record.get(idx).ok_or_else(|| DataError::Parse {
                line,
                message: format!("missing field {}", idx + 1),
            })
        };
        let ts_raw = field(ts_idx)?;
        let timestamp = parse_timestamp(ts_raw).ok_or_else(|| DataError::Parse {
            line,
            message: format!("cannot parse timestamp `{ts_raw}`"),
        })?;
        let target_raw = field(target_idx)?;
        let target: f64 = target_raw.parse().map_err(|_| DataError::Parse {
            line,
            message: format!("cannot parse target `{target_raw}`"),
        })?;
        if !target.is_finite() || target < 0.0 {
            return Err(DataError::Validation(format!(
                "line {line}: target {target} must be a finite non-negative value"
            )));
        }
        let features = feature_idx
            .iter()
            .map(|&i| {
                let raw = field(i)?;
                raw.parse::<f64>().map_err(|_| DataError::Parse {
                    line,
                    message: format!("cannot parse feature `{raw}`"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let series = match series_idx {
            Some(i) => field(i)?.to_string(),
            None => schema.default_series_id.clone(),
        };
        rows.push(Row {
            line,
            series,
            timestamp,
            target,
            features,
        });
    }
    if rows.is_empty() {
        return Err(DataError::NoData);
    }
    Ok(rows)
}

fn build_dataset(series: String, mut rows: Vec<Row>, schema: &CsvSchema) -> Result<TimeSeriesDataset, DataError> {
    rows.sort_by_key(|r| r.timestamp);
    if let Some(w) = rows.windows(2).find(|w| w[0].timestamp == w[1].timestamp) {
        return Err(DataError::Validation(format!(
            "duplicate timestamp {} (lines {} and {})",
            w[1].timestamp, w[0].line, w[1].line
        )));
    }
    let mut features = Matrix::zeros(0, schema.feature_cols.len());
    let mut timestamps = Vec::with_capacity(rows.len());
    let mut targets = Vec::with_capacity(rows.len());
    for row in rows {
        features.push_row(&row.features)?;
        timestamps.push(row.timestamp);
        targets.push(row.target);
    }
    if schema.feature_cols.is_empty() {
        features = Matrix::empty_rows(targets.len());
    }
    TimeSeriesDataset::new(series, timestamps, targets, features, schema.feature_cols.clone())
}

/// Reads a single series. A configured `series_col` must hold one value.
pub fn read_csv<R: Read>(reader: R, schema: &CsvSchema) -> Result<TimeSeriesDataset, DataError> {
    let mut all = read_csv_grouped(reader, schema)?;
    if all.len() != 1 {
        return Err(DataError::Validation(format!(
            "expected a single series, found {}",
            all.len()
        )));
    }
    Ok(all.remove(0))
}

/// Reads one dataset per distinct `series_col` value, ordered by identifier.
pub fn read_csv_grouped<R: Read>(reader: R, schema: &CsvSchema) -> Result<Vec<TimeSeriesDataset>, DataError> {
    let rows = parse_rows(reader, schema)?;
    let mut groups: BTreeMap<String, Vec<Row>> = BTreeMap::new();
    for row in rows {
        groups.entry(row.series.clone()).or_default().push(row);
    }
    groups
        .into_iter()
        .map(|(series, rows)| build_dataset(series, rows, schema))
        .collect()
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<TimeSeriesDataset, DataError> {
    read_csv(File::open(path)?, schema)
}

pub fn load_csv_grouped(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Vec<TimeSeriesDataset>, DataError> {
    read_csv_grouped(File::open(path)?, schema)
}

/// Writes `timestamp,target,series_id,<features...>` rows readable with
/// [`CsvSchema::canonical`]. Reals use the shortest round-trip formatting.
pub fn write_csv<W: Write>(writer: W, datasets: &[&TimeSeriesDataset]) -> Result<(), DataError> {
    let mut wtr = csv::Writer::from_writer(writer);
    let names = datasets.first().map(|d| d.feature_names().to_vec()).unwrap_or_default();
    let mut header = vec!["timestamp".to_string(), "target".into(), "series_id".into()];
    header.extend(names.iter().cloned());
    wtr.write_record(&header)?;
    for ds in datasets {
        if ds.feature_names() != names.as_slice() {
            return Err(DataError::Validation(format!(
                "series `{}` has a different feature schema",
                ds.series_id()
            )));
        }
        for i in 0..ds.len() {
            let mut record = vec![
                ds.timestamps()[i].to_rfc3339_opts(SecondsFormat::AutoSi, true),
                ds.targets()[i].to_string(),
                ds.series_id().to_string(),
            ];
            record.extend(ds.features().row(i).iter().map(|v| v.to_string()));
            wtr.write_record(&record)?;
        }
    }
    wtr.flush()?;
    Ok(())
}
