use serde::{Deserialize, Serialize};

use super::quantile::standard_normal_quantile;
use crate::ensemble::ClusterPredictive;
use crate::error::{Error, Result};

/// Nominal coverage levels 10%, 20%, ..., 90%.
pub const DEFAULT_LEVELS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCurve {
    pub cluster: usize,
    /// `(nominal level, observed fraction)` pairs.
    pub points: Vec<(f64, f64)>,
}

impl CalibrationCurve {
    /// Largest absolute gap between observed and nominal coverage.
    pub fn max_deviation(&self) -> f64 {
        self.points.iter().map(|(l, o)| (o - l).abs()).fold(0.0, f64::max)
    }

    pub fn is_monotone(&self) -> bool {
        self.points.windows(2).all(|w| w[1].1 >= w[0].1)
    }
}

/// Share of targets inside each cluster's central Gaussian interval, per level.
pub fn calibration_curve<P: ClusterPredictive>(
    preds: &[P],
    targets: &[f64],
    levels: &[f64],
) -> Result<Vec<CalibrationCurve>> {
    if preds.len() != targets.len() {
        return Err(Error::shape("calibration targets", preds.len(), targets.len()));
    }
    let k = preds
        .first()
        .map(ClusterPredictive::k)
        .ok_or_else(|| Error::Config("calibration needs at least one prediction".into()))?;
    let z = levels
        .iter()
        .map(|&l| {
            if !(l > 0.0 && l < 1.0) {
                return Err(Error::Config(format!("calibration level must lie in (0, 1), got {l}")));
            }
            standard_normal_quantile(0.5 + l / 2.0)
        })
        .collect::<Result<Vec<_>>>()?;
    let n = preds.len() as f64;
    (0..k)
        .map(|i| {
            let mut inside = vec![0usize; levels.len()];
            for (p, &y) in preds.iter().zip(targets) {
                if p.k() != k {
                    return Err(Error::Config(format!("prediction has {} clusters, expected {k}", p.k())));
                }
                let sd = p.cluster_variance(i).sqrt();
                let r = (y - p.cluster_mean(i)).abs();
                for (c, zl) in inside.iter_mut().zip(&z) {
                    if r <= zl * sd {
                        *c += 1;
                    }
                }
            }
            Ok(CalibrationCurve {
                cluster: i,
                points: levels.iter().zip(inside).map(|(&l, c)| (l, c as f64 / n)).collect(),
            })
        })
        .collect()
}
