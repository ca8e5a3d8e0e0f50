//! The benchmark protocol: per fold, standardize on the training rows,
//! cluster the training features, train, and evaluate on the test rows.

use serde::{Deserialize, Serialize};

use crate::cluster::{cluster_features, ClusterAssignment, DistanceTransform};
use crate::data::{Dataset, FoldSplit, StandardizedSplit};
use crate::ensemble::{DepcModel, DepcPrediction, Ensemble, EnsembleConfig, EnsemblePrediction};
use crate::error::Result;
use crate::eval::EvaluationReport;

/// Where a fold's feature clusters come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ClusterSource {
    Hierarchical {
        threshold: f64,
        transform: DistanceTransform,
    },
    Fixed {
        assignment: ClusterAssignment,
    },
    Singletons,
    Unified,
}

impl ClusterSource {
    pub fn assign(&self, train: &Dataset) -> Result<ClusterAssignment> {
        match self {
            ClusterSource::Hierarchical { threshold, transform } => {
                Ok(cluster_features(&train.x, &train.feature_names, *transform, *threshold, false)?.1)
            }
            ClusterSource::Fixed { assignment } => {
                if assignment.feature_count() != train.d() {
                    return Err(crate::Error::shape("cluster assignment features", train.d(), assignment.feature_count()));
                }
                Ok(assignment.clone())
            }
            ClusterSource::Singletons => Ok(ClusterAssignment::singletons(train.d())),
            ClusterSource::Unified => Ok(ClusterAssignment::unified(train.d())),
        }
    }
}

/// A trained split ensemble for one fold with its test predictions.
#[derive(Debug, Clone)]
pub struct FoldRun {
    pub fold: usize,
    pub split: StandardizedSplit,
    pub ensemble: Ensemble,
    pub predictions: Vec<EnsemblePrediction>,
    /// Test targets in original units.
    pub targets: Vec<f64>,
    pub report: EvaluationReport,
}

impl FoldRun {
    pub fn assignment(&self) -> &ClusterAssignment {
        &self.ensemble.assignment
    }
}

fn original_targets(split: &StandardizedSplit) -> Vec<f64> {
    split.test.y.iter().map(|&z| split.stats.inverse_y(z)).collect()
}

/// Runs the split-ensemble protocol on one fold. Member seeds derive from
/// `config.seed` and the fold index.
pub fn run_fold(data: &Dataset, fold: &FoldSplit, source: &ClusterSource, config: &EnsembleConfig) -> Result<FoldRun> {
    let split = StandardizedSplit::new(data, &fold.train, &fold.test)?;
    let assignment = source.assign(&split.train)?;
    let cfg = EnsembleConfig {
        seed: crate::rng::derive_seed(config.seed, &[fold.fold as u64]),
        ..config.clone()
    };
    let ensemble = Ensemble::train(&split.train, &assignment, &split.stats, &cfg)?;
    let predictions = ensemble.predict_batch_standardized(&split.test.x)?;
    let targets = original_targets(&split);
    let report = EvaluationReport::new(&predictions, &targets, Some(fold.fold))?;
    Ok(FoldRun {
        fold: fold.fold,
        split,
        ensemble,
        predictions,
        targets,
        report,
    })
}

/// The per-cluster baseline on one fold, using the clusters of `assignment`.
#[derive(Debug, Clone)]
pub struct DepcFoldRun {
    pub fold: usize,
    pub model: DepcModel,
    pub predictions: Vec<DepcPrediction>,
    pub targets: Vec<f64>,
    pub report: EvaluationReport,
}

pub fn run_depc_fold(
    data: &Dataset,
    fold: &FoldSplit,
    assignment: &ClusterAssignment,
    config: &EnsembleConfig,
) -> Result<DepcFoldRun> {
    let split = StandardizedSplit::new(data, &fold.train, &fold.test)?;
    let cfg = EnsembleConfig {
        seed: crate::rng::derive_seed(config.seed, &[fold.fold as u64]),
        ..config.clone()
    };
    let model = DepcModel::train(&split.train, assignment, &split.stats, &cfg)?;
    let predictions = model.predict_batch_standardized(&split.test.x)?;
    let targets = original_targets(&split);
    let report = EvaluationReport::new(&predictions, &targets, Some(fold.fold))?;
    Ok(DepcFoldRun {
        fold: fold.fold,
        model,
        predictions,
        targets,
        report,
    })
}
