//! Series ingestion: CSV loading, level transforms and date alignment.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dated levels as read from disk. Dates are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

/// Dated transformed observations (log returns, or levels when a series
/// enters the model untransformed). All values finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub dates: Vec<NaiveDate>,
    pub returns: Vec<f64>,
}

impl ReturnSeries {
    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }
}

/// How a loaded level series is turned into model input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    Level,
    #[default]
    LogReturn,
    LogLevel,
}

impl std::str::FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "level" => Ok(Transform::Level),
            "log-return" => Ok(Transform::LogReturn),
            "log-level" => Ok(Transform::LogLevel),
            other => Err(Error::InvalidInput(format!("unknown transform `{other}`"))),
        }
    }
}

/// Loads `column` from a CSV file with a header row and an ISO-8601 date
/// column (named `date`, otherwise the first column).
pub fn load_csv(path: impl AsRef<Path>, column: &str) -> Result<RawSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, column)
}

/// Same as [`load_csv`] for any reader.
pub fn read_csv<R: Read>(reader: R, column: &str) -> Result<RawSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let date_idx = headers.iter().position(|h| h.eq_ignore_ascii_case("date")).unwrap_or(0);
    let value_idx = headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::MissingColumn(column.to_string()))?;
    if value_idx == date_idx {
        return Err(Error::InvalidInput(format!("`{column}` is the date column")));
    }

    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let date_str = record.get(date_idx).unwrap_or("");
        let date = NaiveDate::parse_from_str(date_str, "%Y-%m-%d").map_err(|e| Error::MalformedRow {
            line,
            message: format!("bad date `{date_str}`: {e}"),
        })?;
        let raw = record.get(value_idx).unwrap_or("");
        let value: f64 = raw.parse().map_err(|_| Error::MalformedRow {
            line,
            message: format!("non-numeric value `{raw}` in column `{column}`"),
        })?;
        if !value.is_finite() {
            return Err(Error::MalformedRow {
                line,
                message: format!("non-finite value `{raw}`"),
            });
        }
        rows.push((date, value, line));
    }

    rows.sort_by_key(|r| r.0);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::MalformedRow {
            line: w[1].2.max(w[0].2),
            message: format!("duplicate date {}", w[0].0),
        });
    }
    if rows.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 rows, found {}",
            rows.len()
        )));
    }
    let (dates, values) = rows.into_iter().map(|(d, v, _)| (d, v)).unzip();
    Ok(RawSeries { dates, values })
}

/// `r_t = ln(x_{t+1} / x_t)`, dated at the later observation.
pub fn log_returns(series: &RawSeries) -> Result<ReturnSeries> {
    let n = series.values.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "log returns need at least 2 levels, got {n}"
        )));
    }
    if let Some((i, v)) = series.values.iter().enumerate().find(|(_, v)| **v <= 0.0) {
        return Err(Error::InvalidInput(format!(
            "non-positive level {v} at {}",
            series.dates[i]
        )));
    }
    let returns = series.values.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    Ok(ReturnSeries {
        dates: series.dates[1..].to_vec(),
        returns,
    })
}

/// Applies a [`Transform`] to a level series.
pub fn transform(series: &RawSeries, how: Transform) -> Result<ReturnSeries> {
    match how {
        Transform::LogReturn => log_returns(series),
        Transform::Level => Ok(ReturnSeries {
            dates: series.dates.clone(),
            returns: series.values.clone(),
        }),
        Transform::LogLevel => {
            if let Some(v) = series.values.iter().find(|v| **v <= 0.0) {
                return Err(Error::InvalidInput(format!("non-positive level {v}")));
            }
            Ok(ReturnSeries {
                dates: series.dates.clone(),
                returns: series.values.iter().map(|v| v.ln()).collect(),
            })
        }
    }
}

/// Inner join on dates. Both inputs must be date-sorted; order is kept.
pub fn align(a: &ReturnSeries, b: &ReturnSeries) -> Result<(ReturnSeries, ReturnSeries)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("cannot align an empty series".into()));
    }
    let (mut i, mut j) = (0, 0);
    let mut out_a = ReturnSeries {
        dates: Vec::new(),
        returns: Vec::new(),
    };
    let mut out_b = out_a.clone();
    while i < a.len() && j < b.len() {
        match a.dates[i].cmp(&b.dates[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out_a.dates.push(a.dates[i]);
                out_a.returns.push(a.returns[i]);
                out_b.dates.push(b.dates[j]);
                out_b.returns.push(b.returns[j]);
                i += 1;
                j += 1;
            }
        }
    }
    if out_a.is_empty() {
        return Err(Error::InvalidInput("series share no dates".into()));
    }
    Ok((out_a, out_b))
}
