//! Comma-separated feature files.
//!
//! A first row that does not parse entirely as numbers is taken as a header.
//! Labeled files carry a `label` column (0 normal, 1 anomaly); without a
//! header the last column is the label.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Option<Vec<String>>,
    pub data: Dataset,
}

fn csv_error(line: u64, message: impl Into<String>) -> Error {
    Error::Csv {
        line,
        message: message.into(),
    }
}

/// Fields of one record, tagged with its line number.
type Numbered = (u64, Vec<String>);

fn records<R: Read>(source: R) -> Result<(Option<Vec<String>>, Vec<Numbered>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let mut header = None;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            csv_error(line, e.to_string())
        })?;
        let line = rec.position().map_or(i as u64 + 1, |p| p.line());
        let fields: Vec<String> = rec.iter().map(str::to_string).collect();
        if fields.len() == 1 && fields[0].is_empty() {
            continue;
        }
        if i == 0 && fields.iter().any(|f| f.parse::<f64>().is_err()) {
            header = Some(fields);
            continue;
        }
        rows.push((line, fields));
    }
    Ok((header, rows))
}

fn parse_rows(rows: &[(u64, Vec<String>)], skip: Option<usize>) -> Result<Dataset> {
    let mut values = Vec::new();
    let mut p = None;
    for (line, fields) in rows {
        let width = fields.len() - usize::from(skip.is_some());
        match p {
            None => p = Some(width),
            Some(expected) if expected != width => {
                return Err(csv_error(
                    *line,
                    format!("expected {expected} feature columns, found {width}"),
                ))
            }
            _ => {}
        }
        for (j, f) in fields.iter().enumerate() {
            if Some(j) == skip {
                continue;
            }
            let v: f64 = f
                .parse()
                .map_err(|_| csv_error(*line, format!("column {}: {f:?} is not a number", j + 1)))?;
            if !v.is_finite() {
                return Err(csv_error(*line, format!("column {}: non-finite value", j + 1)));
            }
            values.push(v);
        }
    }
    let p = p.ok_or(Error::EmptyDataset)?;
    Dataset::from_flat(values, rows.len(), p)
}

/// Reads an unlabeled feature file; a `label` column, if named in the
/// header, is dropped.
pub fn read_features<R: Read>(source: R) -> Result<CsvTable> {
    let (header, rows) = records(source)?;
    let skip = header
        .as_ref()
        .and_then(|h| h.iter().position(|c| c.eq_ignore_ascii_case("label")));
    let data = parse_rows(&rows, skip)?;
    Ok(CsvTable { header, data })
}

/// Reads a labeled file, returning features and anomaly flags.
pub fn read_labeled<R: Read>(source: R) -> Result<(CsvTable, Vec<bool>)> {
    let (header, rows) = records(source)?;
    let label_col = match &header {
        Some(h) => h
            .iter()
            .position(|c| c.eq_ignore_ascii_case("label"))
            .ok_or_else(|| csv_error(1, "header has no label column"))?,
        None => rows
            .first()
            .map(|(_, f)| f.len().saturating_sub(1))
            .ok_or(Error::EmptyDataset)?,
    };
    let mut labels = Vec::with_capacity(rows.len());
    for (line, fields) in &rows {
        let raw = fields
            .get(label_col)
            .ok_or_else(|| csv_error(*line, "missing label"))?;
        let label = match raw.parse::<f64>() {
            Ok(0.0) => false,
            Ok(1.0) => true,
            _ => return Err(csv_error(*line, format!("label {raw:?} is not 0 or 1"))),
        };
        labels.push(label);
    }
    let data = parse_rows(&rows, Some(label_col))?;
    Ok((CsvTable { header, data }, labels))
}

pub fn read_features_path(path: impl AsRef<Path>) -> Result<CsvTable> {
    read_features(File::open(path)?)
}

pub fn read_labeled_path(path: impl AsRef<Path>) -> Result<(CsvTable, Vec<bool>)> {
    read_labeled(File::open(path)?)
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Writes `x0..x{p-1}` columns, plus `label` when labels are given.
pub fn write_dataset<W: Write>(out: W, data: &Dataset, labels: Option<&[bool]>) -> Result<()> {
    if let Some(l) = labels {
        if l.len() != data.n() {
            return Err(Error::LengthMismatch {
                left: l.len(),
                right: data.n(),
            });
        }
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..data.p()).map(|j| format!("x{j}")).collect();
    if labels.is_some() {
        header.push("label".into());
    }
    w.write_record(&header).map_err(csv_io)?;
    for (i, row) in data.rows().enumerate() {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        if let Some(l) = labels {
            rec.push(if l[i] { "1" } else { "0" }.into());
        }
        w.write_record(&rec).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dataset_path(path: impl AsRef<Path>, data: &Dataset, labels: Option<&[bool]>) -> Result<()> {
    write_dataset(File::create(path)?, data, labels)
}
