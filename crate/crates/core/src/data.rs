//! Instance matrices, CSV ingestion and per-feature standardization.

use std::collections::HashMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use log::warn;
use ndarray::Array2;

use crate::error::{Error, Result};

/// Columns whose sample standard deviation falls below this are treated as constant.
const CONSTANT_COLUMN_STD: f64 = 1e-12;

/// An N×D matrix of finite reals, one instance per row.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Array2<f64>,
    standardized: bool,
}

impl DataMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if let Some(pos) = values.iter().position(|x| !x.is_finite()) {
            let d = values.ncols().max(1);
            return Err(Error::contract(format!(
                "non-finite entry at row {}, column {}",
                pos / d,
                pos % d
            )));
        }
        Ok(Self {
            values,
            standardized: false,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::contract("rows have differing lengths"));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let values = Array2::from_shape_vec((rows.len(), d), flat)
            .map_err(|e| Error::contract(e.to_string()))?;
        Self::new(values)
    }

    /// Marks the matrix as standardized without checking. Intended for
    /// data that was produced by [`standardize`] elsewhere.
    pub fn assume_standardized(mut self) -> Self {
        self.standardized = true;
        self
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.ncols()
    }

    /// Copies the given rows, in order, into a new matrix.
    pub fn select_rows(&self, rows: &[usize]) -> DataMatrix {
        DataMatrix {
            values: self.values.select(ndarray::Axis(0), rows),
            standardized: self.standardized,
        }
    }
}

/// Per-column z-scoring with the n−1 sample standard deviation.
///
/// Constant columns are set to zero and reported in the second element.
pub fn standardize(data: &DataMatrix) -> Result<(DataMatrix, Vec<usize>)> {
    let n = data.n_rows();
    if n < 2 {
        return Err(Error::contract(format!(
            "standardize needs at least 2 rows, got {n}"
        )));
    }
    let mut out = data.values.clone();
    let mut constant = Vec::new();
    for (j, mut col) in out.columns_mut().into_iter().enumerate() {
        let mean = col.sum() / n as f64;
        let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let std = var.sqrt();
        if std < CONSTANT_COLUMN_STD {
            col.fill(0.0);
            constant.push(j);
        } else {
            col.mapv_inplace(|x| (x - mean) / std);
        }
    }
    if !constant.is_empty() {
        warn!("standardize: constant columns {constant:?} set to zero");
    }
    Ok((
        DataMatrix {
            values: out,
            standardized: true,
        },
        constant,
    ))
}

/// Reads a dense numeric CSV.
///
/// When `label_column` is given that column is split out and densified to
/// `0..k` in order of first appearance; its cells may be arbitrary strings.
/// Row numbers in errors are 1-based file lines.
pub fn load_csv(
    path: impl AsRef<Path>,
    has_header: bool,
    label_column: Option<usize>,
) -> Result<(DataMatrix, Option<Vec<usize>>)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_csv(file, has_header, label_column)
}

pub fn parse_csv(
    reader: impl std::io::Read,
    has_header: bool,
    label_column: Option<usize>,
) -> Result<(DataMatrix, Option<Vec<usize>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut width: Option<usize> = None;
    let mut flat = Vec::new();
    let mut raw_labels = Vec::new();
    let mut n_rows = 0usize;
    for (idx, record) in rdr.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            column: 0,
            message: e.to_string(),
        })?;
        if has_header && idx == 0 {
            continue;
        }
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match width {
            None => {
                if let Some(lc) = label_column {
                    if lc >= record.len() {
                        return Err(Error::Parse {
                            row,
                            column: lc + 1,
                            message: format!("label column {} out of range", lc + 1),
                        });
                    }
                }
                width = Some(record.len());
            }
            Some(w) if w != record.len() => {
                return Err(Error::Parse {
                    row,
                    column: record.len().min(w) + 1,
                    message: format!("expected {w} fields, found {}", record.len()),
                })
            }
            _ => {}
        }
        for (col, cell) in record.iter().enumerate() {
            if Some(col) == label_column {
                raw_labels.push(cell.to_string());
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: col + 1,
                message: format!("not a number: {cell:?}"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: col + 1,
                    message: format!("non-finite value: {cell:?}"),
                });
            }
            flat.push(value);
        }
        n_rows += 1;
    }
    let Some(width) = width else {
        return Err(Error::Parse {
            row: 0,
            column: 0,
            message: "empty file".into(),
        });
    };
    let d = width - usize::from(label_column.is_some());
    let values =
        Array2::from_shape_vec((n_rows, d), flat).map_err(|e| Error::contract(e.to_string()))?;
    let labels = label_column.map(|_| densify(&raw_labels));
    Ok((DataMatrix::new(values)?, labels))
}

/// Maps arbitrary label tokens to `0..k` by first appearance.
pub fn densify<T: std::hash::Hash + Eq + Clone>(raw: &[T]) -> Vec<usize> {
    let mut ids: HashMap<T, usize> = HashMap::new();
    raw.iter()
        .map(|t| {
            let next = ids.len();
            *ids.entry(t.clone()).or_insert(next)
        })
        .collect()
}

/// Reads a label vector: one label per line, first CSV field used.
pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let raw: Vec<&str> = text
        .lines()
        .map(|l| l.split(',').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .collect();
    if raw.is_empty() {
        return Err(Error::Parse {
            row: 0,
            column: 0,
            message: "empty label file".into(),
        });
    }
    Ok(densify(&raw))
}

pub fn write_labels(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    let path = path.as_ref();
    let mut s = String::with_capacity(labels.len() * 3);
    for l in labels {
        s.push_str(&l.to_string());
        s.push('\n');
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

/// Writes a matrix as headerless CSV using the shortest round-trip float format.
pub fn write_matrix_csv(path: impl AsRef<Path>, values: &Array2<f64>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for row in values.rows() {
        let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(|e| Error::io(path, e))
}
