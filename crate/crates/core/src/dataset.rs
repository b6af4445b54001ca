//! Tabular dataset ingestion, standardization, and stratified splitting.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::matrix::Matrix;
use crate::rng::rng_from_seed;

/// Columns with population std below this are treated as constant.
pub const CONSTANT_STD_EPS: f64 = 1e-12;

/// Row-major expression matrix with per-row ids and binary labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub ids: Vec<String>,
    pub feature_names: Vec<String>,
    pub x: Matrix,
    pub y: Vec<u8>,
}

impl Dataset {
    pub fn new(ids: Vec<String>, feature_names: Vec<String>, x: Matrix, y: Vec<u8>) -> Result<Self> {
        if x.rows() != ids.len() || x.rows() != y.len() {
            return Err(CoreError::LengthMismatch { expected: x.rows(), got: ids.len().min(y.len()) });
        }
        if x.cols() != feature_names.len() {
            return Err(CoreError::DimensionMismatch { expected: x.cols(), got: feature_names.len() });
        }
        if !x.is_finite() {
            return Err(CoreError::ConfigError { reason: "non-finite cell".to_string() });
        }
        if y.iter().any(|&l| l > 1) {
            return Err(CoreError::ConfigError { reason: "label outside {0,1}".to_string() });
        }
        Ok(Dataset { ids, feature_names, x, y })
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn d(&self) -> usize {
        self.x.cols()
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.y.iter().filter(|&&l| l == 1).count();
        (self.n() - pos, pos)
    }

    /// Subset of rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
            feature_names: self.feature_names.clone(),
            x: self.x.select_rows(indices),
            y: indices.iter().map(|&i| self.y[i]).collect(),
        }
    }

    pub fn with_x(&self, x: Matrix) -> Dataset {
        Dataset {
            ids: self.ids.clone(),
            feature_names: self.feature_names.clone(),
            x,
            y: self.y.clone(),
        }
    }
}

/// Column roles for CSV ingestion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CsvSchema {
    pub id_column: Option<String>,
    pub label_column: String,
    /// Case-insensitive tokens treated as missing; the empty string always counts.
    pub missing_tokens: Vec<String>,
}

impl CsvSchema {
    pub fn new(id_column: Option<String>, label_column: impl Into<String>) -> Self {
        CsvSchema {
            id_column,
            label_column: label_column.into(),
            missing_tokens: ["", "na", "nan", "null"].iter().map(|s| s.to_string()).collect(),
        }
    }

    fn is_missing(&self, cell: &str) -> bool {
        let lower = cell.trim().to_lowercase();
        self.missing_tokens.iter().any(|t| t.to_lowercase() == lower)
    }
}

#[derive(Debug, Clone)]
pub struct CsvLoad {
    pub dataset: Dataset,
    /// Rows dropped because a feature or label cell held a missing token.
    pub dropped_rows: usize,
}

/// Parses an in-memory CSV document (header row required, comma-delimited).
/// Rows with any missing token in a feature or label cell are dropped whole.
pub fn parse_csv(text: &str, schema: &CsvSchema) -> Result<CsvLoad> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(CoreError::EmptyDataset)?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();

    let label_idx = columns
        .iter()
        .position(|c| *c == schema.label_column)
        .ok_or_else(|| CoreError::MissingColumn { name: schema.label_column.clone() })?;
    let id_idx = match &schema.id_column {
        Some(name) => Some(
            columns
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| CoreError::MissingColumn { name: name.clone() })?,
        ),
        None => None,
    };

    let feature_cols: Vec<usize> = (0..columns.len())
        .filter(|&j| j != label_idx && Some(j) != id_idx)
        .collect();
    let feature_names: Vec<String> =
        feature_cols.iter().map(|&j| columns[j].to_string()).collect();

    let mut ids = Vec::new();
    let mut y = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut dropped = 0usize;

    for (line_no, line) in lines {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != columns.len() {
            return Err(CoreError::ParseError {
                row: line_no + 1,
                column: format!("<row width {} != {}>", cells.len(), columns.len()),
                value: line.to_string(),
            });
        }
        let relevant = feature_cols.iter().chain(core::iter::once(&label_idx));
        if relevant.clone().any(|&j| schema.is_missing(cells[j])) {
            dropped += 1;
            continue;
        }
        let mut row = Vec::with_capacity(feature_cols.len());
        for &j in &feature_cols {
            let v: f64 = cells[j].parse().map_err(|_| CoreError::ParseError {
                row: line_no + 1,
                column: columns[j].to_string(),
                value: cells[j].to_string(),
            })?;
            if !v.is_finite() {
                return Err(CoreError::ParseError {
                    row: line_no + 1,
                    column: columns[j].to_string(),
                    value: cells[j].to_string(),
                });
            }
            row.push(v);
        }
        let label = match cells[label_idx] {
            "0" => 0u8,
            "1" => 1u8,
            other => {
                return Err(CoreError::ParseError {
                    row: line_no + 1,
                    column: columns[label_idx].to_string(),
                    value: other.to_string(),
                })
            }
        };
        ids.push(match id_idx {
            Some(j) => cells[j].to_string(),
            None => format!("row{}", rows.len()),
        });
        y.push(label);
        rows.push(row);
    }

    if rows.is_empty() {
        return Err(CoreError::EmptyDataset);
    }
    let x = Matrix::from_rows(&rows)?;
    Ok(CsvLoad { dataset: Dataset::new(ids, feature_names, x, y)?, dropped_rows: dropped })
}

/// Per-feature standardization parameters, population (1/n) variance convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl ScalerParams {
    pub fn is_constant(&self, j: usize) -> bool {
        self.stds[j] < CONSTANT_STD_EPS
    }
}

pub fn fit_scaler(train_x: &Matrix) -> Result<ScalerParams> {
    let n = train_x.rows();
    if n == 0 {
        return Err(CoreError::EmptyDataset);
    }
    let d = train_x.cols();
    let mut means = alloc::vec![0.0; d];
    for row in train_x.iter_rows() {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }
    let mut vars = alloc::vec![0.0; d];
    for row in train_x.iter_rows() {
        for ((s, v), m) in vars.iter_mut().zip(row).zip(&means) {
            let delta = v - m;
            *s += delta * delta;
        }
    }
    let stds = vars.iter().map(|s| libm::sqrt(s / n as f64)).collect();
    Ok(ScalerParams { means, stds })
}

/// Standardizes `x` with the fitted parameters; constant columns map to 0.
pub fn apply_scaler(params: &ScalerParams, x: &Matrix) -> Result<Matrix> {
    if x.cols() != params.means.len() {
        return Err(CoreError::DimensionMismatch { expected: params.means.len(), got: x.cols() });
    }
    let mut out = x.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        for (j, v) in row.iter_mut().enumerate() {
            *v = if params.stds[j] < CONSTANT_STD_EPS {
                0.0
            } else {
                (*v - params.means[j]) / params.stds[j]
            };
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SplitResult {
    pub train: Dataset,
    pub test: Dataset,
    pub seed: u64,
    pub test_fraction: f64,
}

/// Stratified train/test split. Within each class, rows are shuffled by a
/// seeded PRNG and the first round(count * test_fraction) go to test.
pub fn split(data: &Dataset, test_fraction: f64, seed: u64) -> Result<SplitResult> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(CoreError::InvalidFraction { value: test_fraction });
    }
    let mut rng = rng_from_seed(seed);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for class in [0u8, 1u8] {
        let mut members: Vec<usize> =
            (0..data.n()).filter(|&i| data.y[i] == class).collect();
        if members.is_empty() {
            return Err(CoreError::DegenerateClass);
        }
        members.shuffle(&mut rng);
        let n_test = libm::round(members.len() as f64 * test_fraction) as usize;
        if n_test == 0 || n_test == members.len() {
            return Err(CoreError::DegenerateClass);
        }
        test_idx.extend_from_slice(&members[..n_test]);
        train_idx.extend_from_slice(&members[n_test..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok(SplitResult {
        train: data.select(&train_idx),
        test: data.select(&test_idx),
        seed,
        test_fraction,
    })
}
