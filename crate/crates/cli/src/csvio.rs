//! Header-first CSV tables of numbers. Missing or non-numeric cells are
//! rejected, never imputed.

use std::path::Path;

use litlvm::{Dataset, Target, TaskKind};
use ndarray::{Array1, Array2};

use crate::config::TargetColumns;
use crate::error::{CliError, Result};

/// Shortest decimal text that parses back to the identical `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Column-major numeric table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.headers
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| CliError::data(format!("missing column '{name}'")))
    }
}

const MISSING: [&str; 6] = ["", "na", "nan", "null", "none", "?"];

pub fn read_table(path: &Path) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let headers: Vec<String> = rdr.headers().map_err(|e| csv_err(path, e))?.iter().map(str::to_owned).collect();
    if headers.is_empty() {
        return Err(CliError::data(format!("{}: no header row", path.display())));
    }
    for (i, h) in headers.iter().enumerate() {
        if headers[..i].contains(h) {
            return Err(CliError::data(format!("{}: duplicate column '{h}'", path.display())));
        }
    }
    let mut columns = vec![Vec::new(); headers.len()];
    for (r, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = r + 2;
        for (c, cell) in record.iter().enumerate() {
            if MISSING.contains(&cell.to_ascii_lowercase().as_str()) {
                return Err(CliError::data(format!(
                    "{}: missing value in column '{}' on line {line}",
                    path.display(),
                    headers[c]
                )));
            }
            let v: f64 = cell.parse().map_err(|_| {
                CliError::data(format!("{}: '{cell}' in column '{}' on line {line} is not a number", path.display(), headers[c]))
            })?;
            if !v.is_finite() {
                return Err(CliError::data(format!(
                    "{}: non-finite value in column '{}' on line {line}",
                    path.display(),
                    headers[c]
                )));
            }
            columns[c].push(v);
        }
    }
    Ok(Table { headers, columns })
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::data(format!("{}: {other:?}", path.display())),
    }
}

/// Builds a dataset from a table. Features are every non-response column in
/// file order, or exactly `features` (matched by name, in that order) when
/// given.
pub fn dataset_from_table(
    table: &Table,
    task: TaskKind,
    cols: &TargetColumns,
    features: Option<&[String]>,
) -> Result<Dataset<f64>> {
    let response = cols.for_task(task);
    let names: Vec<String> = match features {
        Some(f) => f.to_vec(),
        None => table.headers.iter().filter(|h| !response.contains(&h.as_str())).cloned().collect(),
    };
    if names.is_empty() {
        return Err(CliError::data("no feature columns"));
    }
    let n = table.rows();
    let feature_cols = names.iter().map(|name| table.column(name)).collect::<Result<Vec<_>>>()?;
    let x = Array2::from_shape_fn((n, names.len()), |(i, j)| feature_cols[j][i]);
    let target = match task {
        TaskKind::Regression => Target::Regression(Array1::from(table.column(&cols.target)?.to_vec())),
        TaskKind::Classification => Target::Classification(Array1::from(table.column(&cols.target)?.to_vec())),
        TaskKind::Survival => {
            let time = Array1::from(table.column(&cols.time)?.to_vec());
            let event = table
                .column(&cols.event)?
                .iter()
                .map(|&v| match v {
                    0.0 => Ok(false),
                    1.0 => Ok(true),
                    _ => Err(CliError::data(format!("event column '{}' must hold 0 or 1, found {v}", cols.event))),
                })
                .collect::<Result<Vec<_>>>()?;
            Target::Survival { time, event }
        }
    };
    Dataset::new(x, target, names).map_err(|e| CliError::data(e.to_string()))
}

pub fn load_dataset(
    path: &Path,
    task: TaskKind,
    cols: &TargetColumns,
    features: Option<&[String]>,
) -> Result<Dataset<f64>> {
    dataset_from_table(&read_table(path)?, task, cols, features)
}

pub fn write_rows(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Features followed by the response column(s).
pub fn write_dataset(path: &Path, data: &Dataset<f64>, cols: &TargetColumns) -> Result<()> {
    let mut header: Vec<String> = data.feature_names().to_vec();
    header.extend(cols.for_task(data.task()).into_iter().map(str::to_owned));
    let rows = (0..data.n()).map(|i| {
        let mut row: Vec<String> = data.x().row(i).iter().map(|&v| fmt_f64(v)).collect();
        match data.target() {
            Target::Regression(y) | Target::Classification(y) => row.push(fmt_f64(y[i])),
            Target::Survival { time, event } => {
                row.push(fmt_f64(time[i]));
                row.push(if event[i] { "1" } else { "0" }.into());
            }
        }
        row
    });
    write_rows(path, &header, rows)
}
