use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SplitPrediction;

/// Gaussian predictive for one input: a shared mean and one variance per cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsemblePrediction {
    pub mean: f64,
    pub variances: Vec<f64>,
}

impl EnsemblePrediction {
    pub fn k(&self) -> usize {
        self.variances.len()
    }
}

/// Per-cluster Gaussian predictives, possibly with a different mean per cluster.
pub trait ClusterPredictive {
    fn k(&self) -> usize;
    /// Point prediction used for RMSE.
    fn point(&self) -> f64;
    fn cluster_mean(&self, i: usize) -> f64;
    fn cluster_variance(&self, i: usize) -> f64;
}

impl ClusterPredictive for EnsemblePrediction {
    fn k(&self) -> usize {
        self.variances.len()
    }

    fn point(&self) -> f64 {
        self.mean
    }

    fn cluster_mean(&self, _i: usize) -> f64 {
        self.mean
    }

    fn cluster_variance(&self, i: usize) -> f64 {
        self.variances[i]
    }
}

/// Moment-matches a uniform mixture of member Gaussians, cluster by cluster:
/// μ = mean(μₑ), σ²ᵢ = mean(σ²ₑᵢ + μₑ²) − μ².
pub fn aggregate(members: &[SplitPrediction]) -> Result<EnsemblePrediction> {
    let first = members
        .first()
        .ok_or_else(|| Error::Config("cannot aggregate an empty ensemble".into()))?;
    let k = first.k();
    if let Some((e, m)) = members.iter().enumerate().find(|(_, m)| m.k() != k) {
        return Err(Error::Config(format!(
            "member {e} predicts {} cluster variances, member 0 predicts {k}",
            m.k()
        )));
    }
    let n = members.len() as f64;
    if members.len() == 1 {
        return Ok(EnsemblePrediction {
            mean: first.mean,
            variances: first.variances.clone(),
        });
    }
    let mean = members.iter().map(|m| m.mean).sum::<f64>() / n;
    // mean(μₑ²) − μ² computed as the spread about μ, which is the same
    // quantity without the cancellation
    let spread = members.iter().map(|m| (m.mean - mean).powi(2)).sum::<f64>() / n;
    let variances = (0..k)
        .map(|i| members.iter().map(|m| m.variances[i]).sum::<f64>() / n + spread)
        .collect();
    Ok(EnsemblePrediction { mean, variances })
}
