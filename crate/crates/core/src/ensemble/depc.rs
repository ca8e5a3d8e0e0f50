use serde::{Deserialize, Serialize};

use super::{ClusterPredictive, Ensemble, EnsembleConfig};
use crate::cluster::ClusterAssignment;
use crate::data::{Dataset, StandardizationStats};
use crate::error::{Error, Result};
use crate::math::Matrix;

/// Baseline of independent single-variance ensembles, one per feature cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct DepcModel {
    pub assignment: ClusterAssignment,
    pub experts: Vec<Ensemble>,
}

/// One Gaussian per cluster, each with its own mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepcPrediction {
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

impl ClusterPredictive for DepcPrediction {
    fn k(&self) -> usize {
        self.means.len()
    }

    /// Unweighted average of the cluster means.
    fn point(&self) -> f64 {
        self.means.iter().sum::<f64>() / self.means.len() as f64
    }

    fn cluster_mean(&self, i: usize) -> f64 {
        self.means[i]
    }

    fn cluster_variance(&self, i: usize) -> f64 {
        self.variances[i]
    }
}

fn restrict_stats(stats: &StandardizationStats, features: &[usize]) -> StandardizationStats {
    StandardizationStats {
        feature_mean: features.iter().map(|&f| stats.feature_mean[f]).collect(),
        feature_std: features.iter().map(|&f| stats.feature_std[f]).collect(),
        target_mean: stats.target_mean,
        target_std: stats.target_std,
    }
}

fn restrict(data: &Dataset, features: &[usize]) -> Dataset {
    Dataset {
        name: data.name.clone(),
        x: data.x.select_columns(features),
        y: data.y.clone(),
        feature_names: features.iter().map(|&f| data.feature_names[f].clone()).collect(),
        target_name: data.target_name.clone(),
    }
}

impl DepcModel {
    /// Trains one ensemble per cluster of `assignment` on that cluster's
    /// columns of the standardized `train` set.
    pub fn train(
        train: &Dataset,
        assignment: &ClusterAssignment,
        stats: &StandardizationStats,
        config: &EnsembleConfig,
    ) -> Result<Self> {
        if assignment.feature_count() != train.d() {
            return Err(Error::shape("cluster assignment features", train.d(), assignment.feature_count()));
        }
        let experts = assignment
            .clusters()
            .iter()
            .enumerate()
            .map(|(i, features)| {
                let sub = restrict(train, features);
                let cfg = EnsembleConfig {
                    seed: crate::rng::derive_seed(config.seed, &[i as u64]),
                    ..config.clone()
                };
                Ensemble::train(
                    &sub,
                    &ClusterAssignment::unified(features.len()),
                    &restrict_stats(stats, features),
                    &cfg,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DepcModel {
            assignment: assignment.clone(),
            experts,
        })
    }

    pub fn k(&self) -> usize {
        self.experts.len()
    }

    pub fn predict_batch_standardized(&self, x: &Matrix) -> Result<Vec<DepcPrediction>> {
        if x.cols() != self.assignment.feature_count() {
            return Err(Error::shape("input features", self.assignment.feature_count(), x.cols()));
        }
        let per_cluster = self
            .experts
            .iter()
            .zip(self.assignment.clusters())
            .map(|(e, features)| e.predict_batch_standardized(&x.select_columns(features)))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..x.rows())
            .map(|r| DepcPrediction {
                means: per_cluster.iter().map(|p| p[r].mean).collect(),
                variances: per_cluster.iter().map(|p| p[r].variances[0]).collect(),
            })
            .collect())
    }
}
