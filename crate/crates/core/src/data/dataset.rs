use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cluster::{ClusterAssignment, DistanceTransform};
use crate::error::{Error, Result};
use crate::math::Matrix;

/// A regression problem: feature matrix, targets and column names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub x: Matrix,
    pub y: Vec<f64>,
    pub feature_names: Vec<String>,
    pub target_name: String,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        x: Matrix,
        y: Vec<f64>,
        feature_names: Vec<String>,
        target_name: impl Into<String>,
    ) -> Result<Self> {
        let name = name.into();
        let err = |message: String| Error::Dataset {
            name: name.clone(),
            message,
        };
        if x.rows() != y.len() {
            return Err(err(format!("{} rows but {} targets", x.rows(), y.len())));
        }
        if x.rows() < 2 {
            return Err(err(format!("need at least 2 rows, got {}", x.rows())));
        }
        if feature_names.len() != x.cols() {
            return Err(err(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                x.cols()
            )));
        }
        let mut seen = HashSet::new();
        for n in &feature_names {
            if !seen.insert(n.as_str()) {
                return Err(err(format!("duplicate feature name '{n}'")));
            }
        }
        if !x.is_finite() || y.iter().any(|v| !v.is_finite()) {
            return Err(err("non-finite value".into()));
        }
        Ok(Dataset {
            name,
            x,
            y,
            feature_names,
            target_name: target_name.into(),
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn d(&self) -> usize {
        self.x.cols()
    }

    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            x: self.x.select_rows(rows),
            y: rows.iter().map(|&r| self.y[r]).collect(),
            feature_names: self.feature_names.clone(),
            target_name: self.target_name.clone(),
        }
    }

    /// Feature index by name.
    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }
}

/// Published shape and training settings of a benchmark dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DatasetInfo {
    pub name: &'static str,
    pub display_name: &'static str,
    pub rows: usize,
    pub features: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub hidden_units: usize,
    pub folds: usize,
    /// Relative dendrogram cut that reproduces the published feature clusters,
    /// where known; 0.5 otherwise.
    pub cluster_threshold: f64,
    pub distance: DistanceTransform,
}

const fn info(
    name: &'static str,
    display_name: &'static str,
    rows: usize,
    features: usize,
    learning_rate: f64,
    epochs: usize,
    batch_size: usize,
    cluster_threshold: f64,
) -> DatasetInfo {
    DatasetInfo {
        name,
        display_name,
        rows,
        features,
        learning_rate,
        epochs,
        batch_size,
        hidden_units: 50,
        folds: 20,
        cluster_threshold,
        distance: DistanceTransform::Signed,
    }
}

/// The nine benchmark datasets with their training hyperparameters.
pub const BENCHMARKS: [DatasetInfo; 9] = [
    info("boston", "Boston Housing", 506, 13, 0.1, 1000, 100, 0.5),
    info("concrete", "Concrete", 1030, 8, 0.01, 1500, 32, 0.75),
    info("energy", "Energy Efficiency", 768, 8, 0.01, 1500, 16, 0.5),
    info("kin8nm", "Kin8nm", 8192, 8, 0.1, 1000, 100, 0.5),
    info("naval", "Naval Propulsion Plant", 11934, 16, 0.01, 1500, 32, 0.5),
    info("power", "Power Plant Output", 9568, 4, 0.01, 2500, 256, 0.5),
    DatasetInfo {
        hidden_units: 100,
        folds: 5,
        ..info("protein", "Protein Structure", 45730, 9, 0.01, 4000, 1024, 0.5)
    },
    info("wine", "Red Wine Quality", 1599, 11, 0.1, 1000, 100, 0.5),
    info("yacht", "Yacht Hydrodynamics", 308, 6, 0.01, 1500, 8, 0.5),
];

pub fn benchmark_info(name: &str) -> Option<&'static DatasetInfo> {
    let key = name.to_ascii_lowercase();
    BENCHMARKS.iter().find(|b| b.name == key)
}

/// Reads a CSV with a header row. The target is the column named `target`,
/// or the last column when `target` is `None`. When `name` is a known
/// benchmark, row and feature counts are checked against it.
pub fn load_dataset(path: &Path, name: &str, target: Option<&str>) -> Result<Dataset> {
    let shown = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(&shown, e))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(&shown, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.len() < 2 {
        return Err(Error::Parse {
            path: shown,
            row: 1,
            column: 1,
            message: "need at least one feature column and a target column".into(),
        });
    }
    let target_col = match target {
        None => header.len() - 1,
        Some(t) => header.iter().position(|h| h == t).ok_or_else(|| Error::Parse {
            path: shown.clone(),
            row: 1,
            column: 0,
            message: format!("no target column named '{t}'"),
        })?,
    };

    let mut values = Vec::new();
    let mut y = Vec::new();
    for (r, record) in reader.records().enumerate() {
        // 1-based file line: header is line 1
        let line = r + 2;
        let record = record.map_err(|e| csv_error(&shown, e))?;
        if record.len() != header.len() {
            return Err(Error::Parse {
                path: shown,
                row: line,
                column: record.len() + 1,
                message: format!("expected {} cells, found {}", header.len(), record.len()),
            });
        }
        for (c, cell) in record.iter().enumerate() {
            let parse_err = |message: String| Error::Parse {
                path: shown.clone(),
                row: line,
                column: c + 1,
                message,
            };
            if cell.is_empty() {
                return Err(parse_err(format!("missing value in column '{}'", header[c])));
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(format!("non-numeric value '{cell}' in column '{}'", header[c])))?;
            if !v.is_finite() {
                return Err(parse_err(format!("non-finite value '{cell}'")));
            }
            if c == target_col {
                y.push(v);
            } else {
                values.push(v);
            }
        }
    }
    let d = header.len() - 1;
    let n = y.len();
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(c, _)| *c != target_col)
        .map(|(_, h)| h.clone())
        .collect();
    if let Some(info) = benchmark_info(name) {
        if info.rows != n || info.features != d {
            return Err(Error::Dataset {
                name: name.to_string(),
                message: format!(
                    "{shown} has {n} rows x {d} features, expected {} x {}",
                    info.rows, info.features
                ),
            });
        }
    }
    let x = Matrix::from_vec(n, d, values)?;
    Dataset::new(name, x, y, feature_names, header[target_col].clone())
}

fn csv_error(path: &str, e: csv::Error) -> Error {
    let (row, column) = e
        .position()
        .map_or((0, 0), |p| (p.line() as usize, 0));
    Error::Parse {
        path: path.to_string(),
        row,
        column,
        message: e.to_string(),
    }
}

/// Writes `dataset` as CSV with a header row, target last.
pub fn write_dataset(path: &Path, dataset: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(&path.display().to_string(), e))?;
    let mut header = dataset.feature_names.clone();
    header.push(dataset.target_name.clone());
    let io = |e: csv::Error| csv_error(&path.display().to_string(), e);
    w.write_record(&header).map_err(io)?;
    for r in 0..dataset.n() {
        let mut rec: Vec<String> = dataset.x.row(r).iter().map(|v| v.to_string()).collect();
        rec.push(dataset.y[r].to_string());
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a cluster-spec file (one cluster per line, comma-separated feature
/// names) against the dataset's feature names.
pub fn load_cluster_spec(path: &Path, dataset: &Dataset, allow_unified: bool) -> Result<ClusterAssignment> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ClusterAssignment::from_spec_str(&text, &dataset.feature_names, allow_unified)
}

pub fn write_cluster_spec(path: &Path, assignment: &ClusterAssignment, dataset: &Dataset) -> Result<()> {
    std::fs::write(path, assignment.to_spec_string(&dataset.feature_names)).map_err(|e| Error::io(path, e))
}
