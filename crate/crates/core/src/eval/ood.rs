use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::kde::Kde;
use super::metrics::{gaussian_entropy, mean};
use crate::cluster::ClusterAssignment;
use crate::ensemble::{ClusterPredictive, Ensemble};
use crate::error::{Error, Result};
use crate::math::Matrix;
use crate::rng::keyed_rng;

const SHIFT_STREAM: u64 = 0x7368_6966;
const KDE_POINTS: usize = 200;

/// Additive Gaussian noise for selected standardized feature columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftSpec {
    pub features: Vec<usize>,
    pub noise_mean: f64,
    pub noise_std: f64,
    pub seed: u64,
}

impl ShiftSpec {
    pub fn new(features: Vec<usize>, seed: u64) -> Self {
        ShiftSpec {
            features,
            noise_mean: 6.0,
            noise_std: 2.0,
            seed,
        }
    }

    /// Rejects invalid columns and any two targets that share a cluster.
    pub fn validate(&self, assignment: &ClusterAssignment) -> Result<()> {
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite() && self.noise_mean.is_finite()) {
            return Err(Error::Config(format!(
                "shift noise needs a finite mean and non-negative std, got N({}, {}²)",
                self.noise_mean, self.noise_std
            )));
        }
        let mut used = vec![None; assignment.k()];
        for &f in &self.features {
            let c = assignment.cluster_of(f).ok_or_else(|| {
                Error::Config(format!(
                    "shift feature {f} is out of range for {} features",
                    assignment.feature_count()
                ))
            })?;
            if let Some(other) = used[c] {
                return Err(Error::Config(format!(
                    "shift features {other} and {f} are both in cluster {c}; targets must come from distinct clusters"
                )));
            }
            used[c] = Some(f);
        }
        Ok(())
    }
}

/// Adds noise to the targeted columns of standardized inputs. Other columns
/// are copied unchanged.
pub fn inject_shift(x: &Matrix, spec: &ShiftSpec, assignment: &ClusterAssignment) -> Result<Matrix> {
    if x.cols() != assignment.feature_count() {
        return Err(Error::shape("shift inputs", assignment.feature_count(), x.cols()));
    }
    spec.validate(assignment)?;
    let mut out = x.clone();
    let noise = Normal::new(spec.noise_mean, spec.noise_std).expect("validated noise");
    for &f in &spec.features {
        let mut rng = keyed_rng(spec.seed, &[SHIFT_STREAM, f as u64]);
        for i in 0..x.rows() {
            out[(i, f)] += noise.sample(&mut rng);
        }
    }
    Ok(out)
}

/// Entropy samples of one condition, indexed `[cluster][point]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionEntropy {
    pub name: String,
    pub samples: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
}

/// One cluster's density curve under one condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub condition: String,
    pub cluster: usize,
    pub bandwidth: f64,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub k: usize,
    pub conditions: Vec<ConditionEntropy>,
    pub densities: Vec<DensityCurve>,
}

impl EntropyReport {
    pub fn condition(&self, name: &str) -> Option<&ConditionEntropy> {
        self.conditions.iter().find(|c| c.name == name)
    }

    /// Mean entropy of `condition` minus that of the first condition, per cluster.
    pub fn deltas(&self, condition: &str) -> Option<Vec<f64>> {
        let base = self.conditions.first()?;
        let c = self.condition(condition)?;
        Some(c.mean.iter().zip(&base.mean).map(|(a, b)| a - b).collect())
    }
}

pub fn cluster_entropies<P: ClusterPredictive>(preds: &[P]) -> Result<Vec<Vec<f64>>> {
    let k = preds.first().map_or(0, ClusterPredictive::k);
    (0..k)
        .map(|i| preds.iter().map(|p| gaussian_entropy(p.cluster_variance(i))).collect())
        .collect()
}

/// Per-cluster entropy samples, means and KDE curves for each named
/// condition. The first condition is the reference for [`EntropyReport::deltas`].
pub fn entropy_report<P: ClusterPredictive>(conditions: &[(&str, &[P])]) -> Result<EntropyReport> {
    let k = conditions
        .first()
        .and_then(|(_, p)| p.first())
        .map(ClusterPredictive::k)
        .ok_or_else(|| Error::Config("entropy analysis needs non-empty predictions".into()))?;
    let mut out = Vec::with_capacity(conditions.len());
    for (name, preds) in conditions {
        if preds.iter().any(|p| p.k() != k) {
            return Err(Error::Config(format!("condition '{name}' has inconsistent cluster counts")));
        }
        let samples = cluster_entropies(preds)?;
        out.push(ConditionEntropy {
            name: name.to_string(),
            mean: samples.iter().map(|s| mean(s)).collect(),
            samples,
        });
    }
    let mut densities = Vec::new();
    for i in 0..k {
        let kdes = out
            .iter()
            .map(|c| Kde::new(&c.samples[i]))
            .collect::<Result<Vec<_>>>()?;
        let (lo, hi) = kdes.iter().map(Kde::support).fold((f64::INFINITY, f64::NEG_INFINITY), |a, b| {
            (a.0.min(b.0), a.1.max(b.1))
        });
        for (c, kde) in out.iter().zip(&kdes) {
            densities.push(DensityCurve {
                condition: c.name.clone(),
                cluster: i,
                bandwidth: kde.bandwidth(),
                points: kde.grid(lo, hi, KDE_POINTS),
            });
        }
    }
    Ok(EntropyReport {
        k,
        conditions: out,
        densities,
    })
}

/// In-distribution entropies against two single-feature shifts of the
/// standardized inputs `x`.
pub fn entropy_analysis(
    ensemble: &Ensemble,
    x: &Matrix,
    ood1: &ShiftSpec,
    ood2: &ShiftSpec,
) -> Result<EntropyReport> {
    let combined = ShiftSpec {
        features: ood1.features.iter().chain(&ood2.features).copied().collect(),
        ..ood1.clone()
    };
    combined.validate(&ensemble.assignment)?;
    let p_in = ensemble.predict_batch_standardized(x)?;
    let p1 = ensemble.predict_batch_standardized(&inject_shift(x, ood1, &ensemble.assignment)?)?;
    let p2 = ensemble.predict_batch_standardized(&inject_shift(x, ood2, &ensemble.assignment)?)?;
    entropy_report(&[("in", &p_in[..]), ("ood1", &p1[..]), ("ood2", &p2[..])])
}
