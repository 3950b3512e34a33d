use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use crate::data::Dataset;
use crate::error::{Error, Result};

/// A dataset with the original label strings; `label_names[k]` is the label
/// mapped to class `k`, in order of first occurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedData {
    pub dataset: Dataset,
    pub label_names: Vec<String>,
}

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn reader(path: &Path, header: bool) -> Result<csv::Reader<File>> {
    let file = File::open(path)?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn parse_cell(path: &Path, line: u64, column: usize, cell: &str) -> Result<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(parse_error(
            path,
            line,
            format!("column {column}: {cell:?} is not a finite number"),
        )),
    }
}

/// Reads a comma-separated file of numeric features and one label column.
/// Labels may be any strings and are mapped to `0..K` by first occurrence.
pub fn load_csv(path: impl AsRef<Path>, label_column: Option<usize>, header: bool) -> Result<LoadedData> {
    let path = path.as_ref();
    let mut rdr = reader(path, header)?;
    let mut width = None;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();

    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(parse_error(
                path,
                line,
                format!("expected {w} columns, found {}", record.len()),
            ));
        }
        if w < 2 {
            return Err(parse_error(path, line, "need at least one feature and a label column"));
        }
        let label_col = label_column.unwrap_or(w - 1);
        if label_col >= w {
            return Err(parse_error(
                path,
                line,
                format!("label column {label_col} out of range for {w} columns"),
            ));
        }
        for (c, cell) in record.iter().enumerate() {
            if c == label_col {
                let next = names.len();
                let k = *index.entry(cell.to_string()).or_insert_with(|| {
                    names.push(cell.to_string());
                    next
                });
                labels.push(k);
            } else {
                features.push(parse_cell(path, line, c, cell)?);
            }
        }
    }

    let Some(w) = width else {
        return Err(Error::InvalidDataset(format!("{}: no data rows", path.display())));
    };
    if names.len() < 2 {
        return Err(Error::InvalidDataset(format!(
            "{}: need at least 2 classes, found {}",
            path.display(),
            names.len()
        )));
    }
    let dataset = Dataset::from_flat(features, w - 1, labels, names.len())?;
    Ok(LoadedData {
        dataset,
        label_names: names,
    })
}

/// Reads feature rows for prediction. Rows with `n_features + 1` columns
/// have their label column dropped.
pub fn read_feature_rows(
    path: impl AsRef<Path>,
    n_features: usize,
    label_column: Option<usize>,
    header: bool,
) -> Result<Vec<Vec<f64>>> {
    let path = path.as_ref();
    let mut rdr = reader(path, header)?;
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let skip = if record.len() == n_features {
            None
        } else if record.len() == n_features + 1 {
            Some(label_column.unwrap_or(n_features))
        } else {
            return Err(parse_error(
                path,
                line,
                format!(
                    "expected {n_features} feature columns (optionally plus a label), found {}",
                    record.len()
                ),
            ));
        };
        let row = record
            .iter()
            .enumerate()
            .filter(|&(c, _)| Some(c) != skip)
            .map(|(c, cell)| parse_cell(path, line, c, cell))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}
