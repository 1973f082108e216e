//! Plain-text artifacts: parameter paths, PIT series and the comparison matrix.

use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;

use crate::dynamic::ParamPath;
use crate::error::{Error, Result};

/// `x` with 10 significant digits, fixed notation for moderate magnitudes
/// and scientific otherwise. Independent of locale and platform.
pub fn sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.9e}");
    let exp: i32 = sci[sci.find('e').expect("scientific format") + 1..]
        .parse()
        .expect("integer exponent");
    if (-5..10).contains(&exp) {
        let s = format!("{:.*}", (9 - exp) as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        sci
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    Ok(csv::Writer::from_writer(file))
}

/// Writes `date,param,lambda_U,lambda_L`, one row per observation. `param`
/// is the family's first parameter (ρ, θ, δ or λ_U).
pub fn export_path_csv(path: &ParamPath, dates: &[NaiveDate], file: impl AsRef<Path>) -> Result<()> {
    let file = file.as_ref();
    let mut w = csv_writer(file)?;
    write_path(path, dates, &mut w)?;
    w.flush().map_err(io_err(file))
}

pub fn write_path<W: Write>(path: &ParamPath, dates: &[NaiveDate], w: &mut csv::Writer<W>) -> Result<()> {
    if dates.len() != path.len() {
        return Err(Error::InvalidInput(format!(
            "{} dates for a path of length {}",
            dates.len(),
            path.len()
        )));
    }
    w.write_record(["date", "param", "lambda_U", "lambda_L"])?;
    for ((d, p), t) in dates.iter().zip(&path.params).zip(&path.tail) {
        w.write_record([
            d.format("%Y-%m-%d").to_string(),
            sig10(p[0]),
            sig10(t.lambda_u),
            sig10(t.lambda_l),
        ])?;
    }
    Ok(())
}

/// A path CSV read back: `(dates, param, lambda_U, lambda_L)`.
pub type PathColumns = (Vec<NaiveDate>, Vec<f64>, Vec<f64>, Vec<f64>);

pub fn read_path_csv(file: impl AsRef<Path>) -> Result<PathColumns> {
    let file = file.as_ref();
    let f = std::fs::File::open(file).map_err(io_err(file))?;
    let mut rdr = csv::Reader::from_reader(f);
    let mut out: PathColumns = Default::default();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |m: String| Error::MalformedRow { line, message: m };
        let date = NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d").map_err(|e| bad(e.to_string()))?;
        let num = |i: usize| rec[i].parse::<f64>().map_err(|e| bad(e.to_string()));
        out.0.push(date);
        out.1.push(num(1)?);
        out.2.push(num(2)?);
        out.3.push(num(3)?);
    }
    Ok(out)
}

/// Generic numeric table with a date column.
pub fn export_columns(file: impl AsRef<Path>, dates: &[NaiveDate], names: &[&str], columns: &[&[f64]]) -> Result<()> {
    let file = file.as_ref();
    if columns.iter().any(|c| c.len() != dates.len()) || names.len() != columns.len() {
        return Err(Error::InvalidInput("column lengths do not match".into()));
    }
    let mut w = csv_writer(file)?;
    let mut header = vec!["date"];
    header.extend_from_slice(names);
    w.write_record(&header)?;
    for (i, d) in dates.iter().enumerate() {
        let mut row = vec![d.format("%Y-%m-%d").to_string()];
        row.extend(columns.iter().map(|c| sig10(c[i])));
        w.write_record(&row)?;
    }
    w.flush().map_err(io_err(file))
}
