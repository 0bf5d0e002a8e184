use std::collections::BTreeSet;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How an encoded feature column was derived from the raw table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnKind {
    Numeric,
    /// One-hot indicator for `level` of a categorical column.
    Indicator { level: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedColumn {
    pub source: String,
    pub kind: ColumnKind,
    pub mean: f64,
    pub sd: f64,
}

/// Standardization and one-hot metadata for every retained feature column.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    pub columns: Vec<EncodedColumn>,
    pub response: String,
}

impl Encoder {
    /// Maps a standardized row back to raw (one-hot) units.
    pub fn decode(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.columns)
            .map(|(z, c)| z * c.sd + c.mean)
            .collect()
    }

    /// Standardizes a row given in raw (one-hot) units.
    pub fn encode(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(&self.columns)
            .map(|(v, c)| (v - c.mean) / c.sd)
            .collect()
    }
}

/// A table of raw string cells, as read from a CSV with a header row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Row and column bookkeeping from [`encode_dataset`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EncodeReport {
    pub dropped_rows: usize,
    pub dropped_columns: Vec<String>,
}

/// Encoded numeric features (row-major, standardized) and the response.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    n_cols: usize,
    response: Vec<f64>,
    encoder: Encoder,
}

impl Dataset {
    /// Builds a dataset from already-encoded features without rescaling them.
    pub fn from_rows(rows: &[Vec<f64>], response: Vec<f64>) -> Result<Self> {
        let n_cols = check_rows(rows, &response)?;
        let columns = (0..n_cols)
            .map(|j| EncodedColumn {
                source: format!("x{}", j + 1),
                kind: ColumnKind::Numeric,
                mean: 0.0,
                sd: 1.0,
            })
            .collect();
        Ok(Self {
            features: rows.iter().flatten().copied().collect(),
            n_cols,
            response,
            encoder: Encoder {
                columns,
                response: "y".into(),
            },
        })
    }

    /// Z-score standardizes every numeric column of `rows`, dropping constant
    /// columns.
    pub fn standardized(names: &[String], rows: &[Vec<f64>], response: Vec<f64>) -> Result<Self> {
        let n_cols = check_rows(rows, &response)?;
        if names.len() != n_cols {
            return Err(Error::LengthMismatch {
                expected: n_cols,
                actual: names.len(),
            });
        }
        let raw: Vec<RawColumn> = (0..n_cols)
            .map(|j| RawColumn {
                source: names[j].clone(),
                kind: ColumnKind::Numeric,
                values: rows.iter().map(|r| r[j]).collect(),
            })
            .collect();
        let (ds, _) = standardize_columns(raw, response, "y".into())?;
        Ok(ds)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.response.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.response.is_empty()
    }

    #[inline]
    pub fn n_features(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.len()).map(move |i| self.row(i))
    }

    /// Row-major feature storage.
    #[inline]
    pub fn features(&self) -> &[f64] {
        &self.features
    }

    #[inline]
    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn encoder(&self) -> &Encoder {
        &self.encoder
    }

    /// Rows `indices`, in the given order, sharing this dataset's encoding.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut features = Vec::with_capacity(indices.len() * self.n_cols);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        Self {
            features,
            n_cols: self.n_cols,
            response: indices.iter().map(|&i| self.response[i]).collect(),
            encoder: self.encoder.clone(),
        }
    }

    /// Feature columns `cols`, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut features = Vec::with_capacity(self.len() * cols.len());
        for i in 0..self.len() {
            let row = self.row(i);
            features.extend(cols.iter().map(|&j| row[j]));
        }
        Self {
            features,
            n_cols: cols.len(),
            response: self.response.clone(),
            encoder: Encoder {
                columns: cols.iter().map(|&j| self.encoder.columns[j].clone()).collect(),
                response: self.encoder.response.clone(),
            },
        }
    }

    /// Columns left after dropping the first indicator of every categorical
    /// source with two or more indicators. Full one-hot blocks sum to one and
    /// are collinear with an intercept; this is the reference coding.
    pub fn reference_coded_columns(&self) -> Vec<usize> {
        let cols = &self.encoder.columns;
        (0..cols.len())
            .filter(|&j| match cols[j].kind {
                ColumnKind::Numeric => true,
                ColumnKind::Indicator { .. } => {
                    let siblings: Vec<usize> = (0..cols.len())
                        .filter(|&k| {
                            cols[k].source == cols[j].source && matches!(cols[k].kind, ColumnKind::Indicator { .. })
                        })
                        .collect();
                    siblings.len() < 2 || siblings[0] != j
                }
            })
            .collect()
    }

    /// Same features with a replaced response vector.
    pub fn with_response(&self, response: Vec<f64>) -> Result<Self> {
        if response.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: response.len(),
            });
        }
        Ok(Self {
            response,
            ..self.clone()
        })
    }
}

fn check_rows(rows: &[Vec<f64>], response: &[f64]) -> Result<usize> {
    if rows.is_empty() {
        return Err(Error::Empty("dataset has no rows".into()));
    }
    if rows.len() != response.len() {
        return Err(Error::LengthMismatch {
            expected: rows.len(),
            actual: response.len(),
        });
    }
    let n_cols = rows[0].len();
    if let Some(bad) = rows.iter().find(|r| r.len() != n_cols) {
        return Err(Error::LengthMismatch {
            expected: n_cols,
            actual: bad.len(),
        });
    }
    if rows.iter().flatten().chain(response).any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite value in dataset".into()));
    }
    Ok(n_cols)
}

struct RawColumn {
    source: String,
    kind: ColumnKind,
    values: Vec<f64>,
}

fn standardize_columns(
    raw: Vec<RawColumn>,
    response: Vec<f64>,
    response_name: String,
) -> Result<(Dataset, Vec<String>)> {
    let n = response.len();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for col in raw {
        let mean = col.values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            col.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let sd = var.sqrt();
        if !(sd > 0.0) {
            let label = match &col.kind {
                ColumnKind::Numeric => col.source.clone(),
                ColumnKind::Indicator { level } => format!("{}={}", col.source, level),
            };
            warn!("dropping constant feature column {label}");
            dropped.push(label);
            continue;
        }
        kept.push((col, mean, sd));
    }
    let n_cols = kept.len();
    let mut features = vec![0.0; n * n_cols];
    for (j, (col, mean, sd)) in kept.iter().enumerate() {
        for (i, v) in col.values.iter().enumerate() {
            features[i * n_cols + j] = (v - mean) / sd;
        }
    }
    let columns = kept
        .into_iter()
        .map(|(col, mean, sd)| EncodedColumn {
            source: col.source,
            kind: col.kind,
            mean,
            sd,
        })
        .collect();
    Ok((
        Dataset {
            features,
            n_cols,
            response,
            encoder: Encoder {
                columns,
                response: response_name,
            },
        },
        dropped,
    ))
}

fn is_missing(cell: &str) -> bool {
    cell.trim().is_empty()
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// One-hot encodes categorical columns and z-score standardizes every
/// feature column. Rows with an empty cell are dropped; constant feature
/// columns are dropped with a warning. A constant response is allowed.
pub fn encode_dataset(raw: &RawTable, response: &str) -> Result<(Dataset, EncodeReport)> {
    let target = raw
        .headers
        .iter()
        .position(|h| h == response)
        .ok_or_else(|| Error::Data(format!("unknown response column {response:?}")))?;
    for (i, row) in raw.rows.iter().enumerate() {
        if row.len() != raw.headers.len() {
            return Err(Error::Data(format!(
                "row {} has {} cells, header has {}",
                i + 1,
                row.len(),
                raw.headers.len()
            )));
        }
    }
    let complete: Vec<&Vec<String>> = raw
        .rows
        .iter()
        .filter(|row| !row.iter().any(|c| is_missing(c)))
        .collect();
    let dropped_rows = raw.rows.len() - complete.len();
    if dropped_rows > 0 {
        warn!("dropped {dropped_rows} rows with missing values");
    }
    if complete.is_empty() {
        return Err(Error::Empty("no complete rows".into()));
    }

    let y = complete
        .iter()
        .enumerate()
        .map(|(i, row)| {
            parse_number(&row[target]).ok_or_else(|| {
                Error::Data(format!(
                    "non-numeric response {:?} in data row {}",
                    row[target],
                    i + 1
                ))
            })
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut columns = Vec::new();
    for (j, name) in raw.headers.iter().enumerate() {
        if j == target {
            continue;
        }
        let numeric: Option<Vec<f64>> = complete.iter().map(|row| parse_number(&row[j])).collect();
        match numeric {
            Some(values) => columns.push(RawColumn {
                source: name.clone(),
                kind: ColumnKind::Numeric,
                values,
            }),
            None => {
                let levels: BTreeSet<&str> = complete.iter().map(|row| row[j].trim()).collect();
                for level in levels {
                    columns.push(RawColumn {
                        source: name.clone(),
                        kind: ColumnKind::Indicator {
                            level: level.to_string(),
                        },
                        values: complete
                            .iter()
                            .map(|row| f64::from(u8::from(row[j].trim() == level)))
                            .collect(),
                    });
                }
            }
        }
    }
    let (dataset, dropped_columns) = standardize_columns(columns, y, response.to_string())?;
    Ok((
        dataset,
        EncodeReport {
            dropped_rows,
            dropped_columns,
        },
    ))
}
