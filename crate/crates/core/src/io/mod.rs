//! CSV ingestion and preprocessing, table and report writers.

mod report;
pub mod svg;

pub use report::{fit_dataset, ComponentGrid, Convergence, FitConfig, GridEstimate, ResolvedTuning, RunReport, Timings, TABLE_HEADER};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest sample the fitting pipeline accepts.
pub const MIN_ROWS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessing {
    /// Subtracted from every response.
    pub y_center: f64,
    /// Column maxima the covariates were divided by.
    pub x1_max: f64,
    pub x2_max: f64,
    /// Exact zeros moved to the smallest positive double.
    pub zero_replacements: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub column_names: Vec<String>,
    pub y_col: String,
    pub x1_col: String,
    pub x2_col: String,
    pub y: Vec<f64>,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub preprocessing: Option<Preprocessing>,
    pub warnings: Vec<String>,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Centers `y` and divides each covariate by its maximum. A dataset that
    /// was already preprocessed is returned unchanged.
    pub fn preprocess(mut self) -> Result<Self> {
        if self.preprocessing.is_some() {
            return Ok(self);
        }
        let n = self.n() as f64;
        let y_center = self.y.iter().sum::<f64>() / n;
        self.y.iter_mut().for_each(|v| *v -= y_center);
        let mut zeros = 0;
        let mut maxima = [0.0; 2];
        for (k, (name, col)) in [(&self.x1_col, &mut self.x1), (&self.x2_col, &mut self.x2)]
            .into_iter()
            .enumerate()
        {
            if let Some(i) = col.iter().position(|v| *v < 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "column {name} has a negative value {} in row {}; covariates must be non-negative",
                    col[i],
                    i + 1
                )));
            }
            let max = col.iter().fold(0.0f64, |m, v| m.max(*v));
            if !(max > 0.0) {
                return Err(Error::InvalidConfig(format!("column {name} has no positive value")));
            }
            maxima[k] = max;
            for v in col.iter_mut() {
                *v /= max;
                if *v == 0.0 {
                    *v = f64::MIN_POSITIVE;
                    zeros += 1;
                }
            }
        }
        if zeros > 0 {
            let msg = format!("{zeros} covariate value(s) equal to 0 were moved to {:e}", f64::MIN_POSITIVE);
            log::warn!("{msg}");
            self.warnings.push(msg);
        }
        self.preprocessing = Some(Preprocessing {
            y_center,
            x1_max: maxima[0],
            x2_max: maxima[1],
            zero_replacements: zeros,
        });
        Ok(self)
    }
}

fn parse_cell(raw: &str, row: usize, column: &str) -> Result<f64> {
    let t = raw.trim();
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            row,
            column: column.to_string(),
            value: raw.to_string(),
        }),
    }
}

/// Reads the three named columns; rows are numbered from 1 after the header.
pub fn load_csv(path: &Path, y_col: &str, x1_col: &str, x2_col: &str, preprocess: bool) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let locate = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let idx = [locate(y_col)?, locate(x1_col)?, locate(x2_col)?];
    let names = [y_col, x1_col, x2_col];
    let mut cols: [Vec<f64>; 3] = Default::default();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        for k in 0..3 {
            let raw = record.get(idx[k]).unwrap_or("");
            cols[k].push(parse_cell(raw, r + 1, names[k])?);
        }
    }
    let n = cols[0].len();
    if n < MIN_ROWS {
        return Err(Error::TooFewRows { n });
    }
    let [y, x1, x2] = cols;
    let data = Dataset {
        column_names: headers,
        y_col: y_col.to_string(),
        x1_col: x1_col.to_string(),
        x2_col: x2_col.to_string(),
        y,
        x1,
        x2,
        preprocessing: None,
        warnings: Vec::new(),
    };
    if preprocess {
        data.preprocess()
    } else {
        Ok(data)
    }
}

/// Seventeen significant digits, enough to round-trip any double.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_table(path: &Path, headers: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(headers)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format_f64(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .zip(&headers)
            .map(|(v, h)| parse_cell(v, r + 1, h))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((headers, rows))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("config line {} is not key=value: {line}", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}
