use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gaussian-kernel density estimate over one-dimensional samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kde {
    samples: Vec<f64>,
    bandwidth: f64,
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Silverman's rule of thumb, 0.9·min(sd, IQR/1.34)·n^(-1/5).
///
/// Falls back to the standard deviation when the IQR is zero, and to a small
/// scale-relative width when all samples coincide.
pub fn silverman_bandwidth(samples: &[f64]) -> Result<f64> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::Config(format!("bandwidth needs at least 2 samples, got {n}")));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite KDE sample".into()));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let sd = (samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    if spread > 0.0 {
        Ok(0.9 * spread * (n as f64).powf(-0.2))
    } else {
        Ok(1e-3 * mean.abs().max(1.0))
    }
}

impl Kde {
    pub fn new(samples: &[f64]) -> Result<Self> {
        Ok(Kde {
            bandwidth: silverman_bandwidth(samples)?,
            samples: samples.to_vec(),
        })
    }

    pub fn with_bandwidth(samples: &[f64], bandwidth: f64) -> Result<Self> {
        if samples.is_empty() || !(bandwidth > 0.0) {
            return Err(Error::Config(format!(
                "KDE needs samples and a positive bandwidth, got {} samples and {bandwidth}",
                samples.len()
            )));
        }
        Ok(Kde {
            samples: samples.to_vec(),
            bandwidth,
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn density(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let norm = 1.0 / (self.samples.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
        norm * self
            .samples
            .iter()
            .map(|s| (-0.5 * ((x - s) / h).powi(2)).exp())
            .sum::<f64>()
    }

    /// Density on `points` evenly spaced values over `[lo, hi]`.
    pub fn grid(&self, lo: f64, hi: f64, points: usize) -> Vec<(f64, f64)> {
        (0..points)
            .map(|i| {
                let x = if points == 1 {
                    lo
                } else {
                    lo + (hi - lo) * i as f64 / (points - 1) as f64
                };
                (x, self.density(x))
            })
            .collect()
    }

    /// Sample range padded by three bandwidths on each side.
    pub fn support(&self) -> (f64, f64) {
        let lo = self.samples.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo - 3.0 * self.bandwidth, hi + 3.0 * self.bandwidth)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn bandwidth_formula() {
        let s = [1.0, 2.0, 3.0, 4.0, 5.0];
        // sd = sqrt(2.5), IQR = 2 so IQR/1.34 < sd
        let expected = 0.9 * (2.0 / 1.34) * 5f64.powf(-0.2);
        assert!((silverman_bandwidth(&s).unwrap() - expected).abs() < 1e-14);
        assert!(silverman_bandwidth(&[1.0]).is_err());
        assert!(silverman_bandwidth(&[2.0, 2.0, 2.0]).unwrap() > 0.0);
    }

    #[test]
    fn integrates_to_one() {
        let kde = Kde::new(&[0.0, 0.3, 1.0, 5.0]).unwrap();
        let (lo, hi) = kde.support();
        let (lo, hi) = (lo - 5.0, hi + 5.0);
        let n = 20_000;
        let dx = (hi - lo) / n as f64;
        let total: f64 = (0..n).map(|i| kde.density(lo + (i as f64 + 0.5) * dx) * dx).sum();
        assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn recovers_standard_normal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s: Vec<f64> = (0..5000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let kde = Kde::new(&s).unwrap();
        let phi0 = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((kde.density(0.0) - phi0).abs() < 0.02);
    }
}
