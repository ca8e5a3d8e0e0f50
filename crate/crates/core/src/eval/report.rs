use std::path::Path;

use serde::{Deserialize, Serialize};

use super::calibration::{calibration_curve, CalibrationCurve, DEFAULT_LEVELS};
use super::metrics::{cluster_nll, mean, point_predictions, rmse};
use super::ood::EntropyReport;
use crate::ensemble::{write_json, ClusterPredictive};
use crate::error::{Error, Result};

/// Test-set metrics for one fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub fold: Option<usize>,
    pub n_test: usize,
    pub rmse: f64,
    pub cluster_nll: Vec<f64>,
    /// Cluster NLLs averaged over clusters.
    pub mean_cluster_nll: f64,
    pub calibration: Vec<CalibrationCurve>,
}

impl EvaluationReport {
    pub fn new<P: ClusterPredictive>(preds: &[P], targets: &[f64], fold: Option<usize>) -> Result<Self> {
        let nll = cluster_nll(preds, targets)?;
        Ok(EvaluationReport {
            fold,
            n_test: targets.len(),
            rmse: rmse(&point_predictions(preds), targets)?,
            mean_cluster_nll: mean(&nll),
            cluster_nll: nll,
            calibration: calibration_curve(preds, targets, &DEFAULT_LEVELS)?,
        })
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}

/// Mean and standard error of a per-fold quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        let m = mean(values);
        let std_error = if n > 1 {
            (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() / (n as f64).sqrt()
        } else {
            0.0
        };
        Summary { mean: m, std_error, n }
    }
}

impl std::fmt::Display for Summary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.2} ± {:.2}", self.mean, self.std_error)
    }
}

/// Across-fold summary of a set of fold reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossFoldSummary {
    pub folds: usize,
    pub rmse: Summary,
    pub mean_cluster_nll: Summary,
}

impl CrossFoldSummary {
    pub fn new(reports: &[EvaluationReport]) -> Result<Self> {
        if reports.is_empty() {
            return Err(Error::Config("no fold reports to summarize".into()));
        }
        Ok(CrossFoldSummary {
            folds: reports.len(),
            rmse: Summary::of(&reports.iter().map(|r| r.rmse).collect::<Vec<_>>()),
            mean_cluster_nll: Summary::of(&reports.iter().map(|r| r.mean_cluster_nll).collect::<Vec<_>>()),
        })
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_err(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Numerical(format!("{}: {other:?}", path.display())),
    }
}

fn write_rows(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_calibration_csv(path: &Path, curves: &[CalibrationCurve]) -> Result<()> {
    write_rows(
        path,
        &["cluster", "level", "observed"],
        curves.iter().flat_map(|c| {
            c.points
                .iter()
                .map(move |(l, o)| vec![c.cluster.to_string(), l.to_string(), o.to_string()])
        }),
    )
}

pub fn write_entropy_csv(path: &Path, report: &EntropyReport) -> Result<()> {
    write_rows(
        path,
        &["condition", "cluster", "index", "entropy"],
        report.conditions.iter().flat_map(|c| {
            c.samples.iter().enumerate().flat_map(move |(i, s)| {
                s.iter()
                    .enumerate()
                    .map(move |(j, e)| vec![c.name.clone(), i.to_string(), j.to_string(), e.to_string()])
            })
        }),
    )
}

pub fn write_density_csv(path: &Path, report: &EntropyReport) -> Result<()> {
    write_rows(
        path,
        &["condition", "cluster", "entropy", "density"],
        report.densities.iter().flat_map(|d| {
            d.points
                .iter()
                .map(move |(x, y)| vec![d.condition.clone(), d.cluster.to_string(), x.to_string(), y.to_string()])
        }),
    )
}
