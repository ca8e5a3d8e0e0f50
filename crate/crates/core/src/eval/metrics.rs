use crate::ensemble::ClusterPredictive;
use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

pub fn rmse(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    if predictions.len() != targets.len() {
        return Err(Error::shape("rmse targets", predictions.len(), targets.len()));
    }
    if predictions.is_empty() {
        return Err(Error::Config("rmse of an empty prediction set".into()));
    }
    let sse: f64 = predictions.iter().zip(targets).map(|(p, y)| (p - y) * (p - y)).sum();
    Ok((sse / predictions.len() as f64).sqrt())
}

/// Point predictions of a batch of predictives.
pub fn point_predictions<P: ClusterPredictive>(preds: &[P]) -> Vec<f64> {
    preds.iter().map(ClusterPredictive::point).collect()
}

/// Univariate Gaussian negative log-density.
pub fn gaussian_nll(mean: f64, variance: f64, y: f64) -> f64 {
    0.5 * (variance.ln() + (y - mean) * (y - mean) / variance + LN_2PI)
}

/// Mean test NLL of each cluster's Gaussian.
pub fn cluster_nll<P: ClusterPredictive>(preds: &[P], targets: &[f64]) -> Result<Vec<f64>> {
    if preds.len() != targets.len() {
        return Err(Error::shape("cluster nll targets", preds.len(), targets.len()));
    }
    let first = preds
        .first()
        .ok_or_else(|| Error::Config("cluster nll of an empty prediction set".into()))?;
    let k = first.k();
    let mut sums = vec![0.0; k];
    for (p, &y) in preds.iter().zip(targets) {
        if p.k() != k {
            return Err(Error::Config(format!("prediction has {} clusters, expected {k}", p.k())));
        }
        for (i, s) in sums.iter_mut().enumerate() {
            let v = p.cluster_variance(i);
            if !(v > 0.0) {
                return Err(Error::NonPositiveVariance { cluster: i, value: v });
            }
            *s += gaussian_nll(p.cluster_mean(i), v, y);
        }
    }
    Ok(sums.into_iter().map(|s| s / preds.len() as f64).collect())
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Differential entropy in nats of a Gaussian with variance `variance`.
pub fn gaussian_entropy(variance: f64) -> Result<f64> {
    if !(variance > 0.0) {
        return Err(Error::NonPositiveVariance { cluster: 0, value: variance });
    }
    Ok(0.5 * (LN_2PI + 1.0 + variance.ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::EnsemblePrediction;

    fn p(mean: f64, variances: &[f64]) -> EnsemblePrediction {
        EnsemblePrediction {
            mean,
            variances: variances.to_vec(),
        }
    }

    #[test]
    fn rmse_cases() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((rmse(&[1.5, 2.5, -0.5], &[1.0, 2.0, -1.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(rmse(&[], &[]).is_err());
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn nll_analytic_values() {
        let var = 1.0 / (2.0 * std::f64::consts::PI);
        assert!(cluster_nll(&[p(3.0, &[var])], &[3.0]).unwrap()[0].abs() < 1e-15);
        let v = cluster_nll(&[p(0.0, &[1.0, 1.0])], &[0.0]).unwrap();
        assert!((v[0] - 0.918_938_533_204_672_7).abs() < 1e-12);
        assert_eq!(v[0], v[1]);
        assert!(matches!(
            cluster_nll(&[p(0.0, &[1.0, 0.0])], &[0.0]),
            Err(Error::NonPositiveVariance { cluster: 1, .. })
        ));
    }

    #[test]
    fn entropy_values() {
        let root = 1.0 / (2.0 * std::f64::consts::PI * std::f64::consts::E);
        assert!(gaussian_entropy(root).unwrap().abs() < 1e-15);
        assert!((gaussian_entropy(1.0).unwrap() - 1.418_938_533_204_672_7).abs() < 1e-12);
        let d = gaussian_entropy(8.0).unwrap() - gaussian_entropy(2.0).unwrap();
        assert!((d - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(gaussian_entropy(0.0).is_err());
        assert!(gaussian_entropy(-1.0).is_err());
    }
}
