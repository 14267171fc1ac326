use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::path::Path;

use chrono::{DateTime, Datelike, NaiveDate, Timelike, Utc, Weekday};
use serde::{Deserialize, Serialize};

use super::FeatureError;
use crate::matrix::Matrix;

/// Which calendar columns to emit.
///
/// The default yields 14 columns: hour, day of month, month, day of week,
/// sin/cos pairs for 6h, 12h, 24h and 168h periods, a holiday flag and a
/// weekend flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalendarFeatureConfig {
    /// `(name, period in hours)` for each cyclical encoding.
    pub periods: Vec<(String, f64)>,
    pub holidays: BTreeSet<NaiveDate>,
    pub include_weekend_flag: bool,
    pub include_raw_temporal: bool,
}

impl Default for CalendarFeatureConfig {
    fn default() -> Self {
        Self {
            periods: vec![
                ("quarter_day".into(), 6.0),
                ("half_day".into(), 12.0),
                ("day".into(), 24.0),
                ("week".into(), 168.0),
            ],
            holidays: BTreeSet::new(),
            include_weekend_flag: true,
            include_raw_temporal: true,
        }
    }
}

impl CalendarFeatureConfig {
    pub fn with_holidays(mut self, holidays: impl IntoIterator<Item = NaiveDate>) -> Self {
        self.holidays.extend(holidays);
        self
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        if self.include_raw_temporal {
            names.extend(["hour", "day_of_month", "month", "day_of_week"].map(String::from));
        }
        for (name, _) in &self.periods {
            names.push(format!("sin_{name}"));
            names.push(format!("cos_{name}"));
        }
        names.push("holiday".into());
        if self.include_weekend_flag {
            names.push("weekend".into());
        }
        names
    }

    fn validate(&self) -> Result<(), FeatureError> {
        if let Some((name, p)) = self.periods.iter().find(|(_, p)| !(p.is_finite() && *p > 0.0)) {
            return Err(FeatureError::Input(format!("period `{name}` = {p} must be positive")));
        }
        Ok(())
    }
}

/// Builds the calendar feature table for `timestamps`.
///
/// Cyclical phases use hours since the Unix epoch, reduced modulo the
/// period before the trigonometric call so the pairs stay accurate for
/// large timestamps.
pub fn build_calendar_features(
    timestamps: &[DateTime<Utc>],
    config: &CalendarFeatureConfig,
) -> Result<(Matrix, Vec<String>), FeatureError> {
    config.validate()?;
    let names = config.feature_names();
    let mut m = Matrix::zeros(timestamps.len(), names.len());
    for (i, t) in timestamps.iter().enumerate() {
        let row = m.row_mut(i);
        let mut c = 0;
        if config.include_raw_temporal {
            row[0] = f64::from(t.hour());
            row[1] = f64::from(t.day());
            row[2] = f64::from(t.month());
            row[3] = f64::from(t.weekday().num_days_from_monday());
            c = 4;
        }
        let hours = t.timestamp() as f64 / 3600.0;
        for (_, period) in &config.periods {
            let phase = TAU * hours.rem_euclid(*period) / period;
            row[c] = phase.sin();
            row[c + 1] = phase.cos();
            c += 2;
        }
        row[c] = if config.holidays.contains(&t.date_naive()) { 1.0 } else { 0.0 };
        c += 1;
        if config.include_weekend_flag {
            row[c] = if matches!(t.weekday(), Weekday::Sat | Weekday::Sun) { 1.0 } else { 0.0 };
        }
    }
    Ok((m, names))
}

/// Parses newline-delimited ISO dates; blank lines and `#` comments are skipped.
pub fn parse_holidays(text: &str) -> Result<BTreeSet<NaiveDate>, FeatureError> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| {
            NaiveDate::parse_from_str(l, "%Y-%m-%d")
                .map_err(|e| FeatureError::Input(format!("holiday line {}: `{l}`: {e}", i + 1)))
        })
        .collect()
}

pub fn load_holidays(path: impl AsRef<Path>) -> Result<BTreeSet<NaiveDate>, FeatureError> {
    parse_holidays(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{Duration, TimeZone};

    fn at(y: i32, mo: u32, d: u32, h: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(y, mo, d, h, 0, 0).unwrap()
    }

    fn col(names: &[String], name: &str) -> usize {
        names.iter().position(|n| n == name).unwrap()
    }

    #[test]
    fn default_has_fourteen_columns() {
        let (m, names) = build_calendar_features(&[at(2021, 3, 1, 0)], &CalendarFeatureConfig::default()).unwrap();
        assert_eq!(names.len(), 14);
        assert_eq!(m.ncols(), 14);
    }

    #[test]
    fn day_phase_at_midnight_and_noon() {
        // 2021-03-01 is a Monday
        let cfg = CalendarFeatureConfig::default();
        let (m, names) = build_calendar_features(&[at(2021, 3, 1, 0), at(2021, 3, 1, 12)], &cfg).unwrap();
        let (s, c) = (col(&names, "sin_day"), col(&names, "cos_day"));
        assert_eq!((m.get(0, s), m.get(0, c)), (0.0, 1.0));
        assert!(m.get(1, s).abs() < 1e-12);
        assert!((m.get(1, c) + 1.0).abs() < 1e-12);
        assert_eq!(m.get(0, col(&names, "day_of_week")), 0.0);
        assert_eq!(m.get(0, col(&names, "weekend")), 0.0);
    }

    #[test]
    fn holiday_and_weekend_flags() {
        let cfg = CalendarFeatureConfig::default().with_holidays([NaiveDate::from_ymd_opt(2021, 12, 25).unwrap()]);
        let ts = [at(2021, 12, 25, 9), at(2021, 12, 24, 9)];
        let (m, names) = build_calendar_features(&ts, &cfg).unwrap();
        let h = col(&names, "holiday");
        assert_eq!((m.get(0, h), m.get(1, h)), (1.0, 0.0));
        let w = col(&names, "weekend");
        assert_eq!((m.get(0, w), m.get(1, w)), (1.0, 0.0));
    }

    #[test]
    fn cyclical_pairs_on_unit_circle() {
        let cfg = CalendarFeatureConfig::default();
        let start = at(1995, 1, 1, 0);
        let ts: Vec<_> = (0..5000).map(|i| start + Duration::minutes(97 * i)).collect();
        let (m, names) = build_calendar_features(&ts, &cfg).unwrap();
        for (name, _) in &cfg.periods {
            let (s, c) = (col(&names, &format!("sin_{name}")), col(&names, &format!("cos_{name}")));
            for i in 0..m.nrows() {
                assert!((m.get(i, s).powi(2) + m.get(i, c).powi(2) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn holiday_file_parsing() {
        let set = parse_holidays("# national\n2021-01-01\n\n2021-12-25\n").unwrap();
        assert_eq!(set.len(), 2);
        assert!(parse_holidays("2021-13-01").is_err());
    }

    #[test]
    fn non_positive_period_rejected() {
        let cfg = CalendarFeatureConfig {
            periods: vec![("bad".into(), 0.0)],
            ..Default::default()
        };
        assert!(build_calendar_features(&[at(2021, 1, 1, 0)], &cfg).is_err());
    }
}
