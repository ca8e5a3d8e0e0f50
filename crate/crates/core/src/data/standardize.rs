use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::math::Matrix;

/// Per-feature and target z-score statistics (population standard deviation),
/// fitted on a training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationStats {
    pub feature_mean: Vec<f64>,
    pub feature_std: Vec<f64>,
    pub target_mean: f64,
    pub target_std: f64,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn is_degenerate(std: f64, mean: f64) -> bool {
    !(std > 1e-12 * mean.abs().max(1.0))
}

impl StandardizationStats {
    pub fn fit(train: &Dataset) -> Result<Self> {
        let mut feature_mean = Vec::with_capacity(train.d());
        let mut feature_std = Vec::with_capacity(train.d());
        for j in 0..train.d() {
            let (m, s) = mean_std((0..train.n()).map(|i| train.x[(i, j)]));
            if is_degenerate(s, m) {
                return Err(Error::ConstantFeature {
                    name: train.feature_names[j].clone(),
                    index: j,
                });
            }
            feature_mean.push(m);
            feature_std.push(s);
        }
        let (target_mean, target_std) = mean_std(train.y.iter().copied());
        if is_degenerate(target_std, target_mean) {
            return Err(Error::Dataset {
                name: train.name.clone(),
                message: format!("target '{}' is constant on the training split", train.target_name),
            });
        }
        Ok(StandardizationStats {
            feature_mean,
            feature_std,
            target_mean,
            target_std,
        })
    }

    /// Statistics that leave data unchanged.
    pub fn identity(d: usize) -> Self {
        StandardizationStats {
            feature_mean: vec![0.0; d],
            feature_std: vec![1.0; d],
            target_mean: 0.0,
            target_std: 1.0,
        }
    }

    pub fn d(&self) -> usize {
        self.feature_mean.len()
    }

    pub fn transform_x(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.d() {
            return Err(Error::shape("standardize features", self.d(), x.cols()));
        }
        let mut out = x.clone();
        for i in 0..x.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                *v = (*v - self.feature_mean[j]) / self.feature_std[j];
            }
        }
        Ok(out)
    }

    pub fn transform_row(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, v)| (v - self.feature_mean[j]) / self.feature_std[j])
            .collect()
    }

    pub fn transform_y(&self, y: &[f64]) -> Vec<f64> {
        y.iter().map(|v| (v - self.target_mean) / self.target_std).collect()
    }

    pub fn inverse_y(&self, y: f64) -> f64 {
        y * self.target_std + self.target_mean
    }

    /// Standardized variance to the original target scale.
    pub fn inverse_variance(&self, var: f64) -> f64 {
        var * self.target_std * self.target_std
    }

    pub fn transform(&self, data: &Dataset) -> Result<Dataset> {
        Ok(Dataset {
            name: data.name.clone(),
            x: self.transform_x(&data.x)?,
            y: self.transform_y(&data.y),
            feature_names: data.feature_names.clone(),
            target_name: data.target_name.clone(),
        })
    }
}

/// A train/test pair standardized with the training statistics.
#[derive(Debug, Clone)]
pub struct StandardizedSplit {
    pub train: Dataset,
    pub test: Dataset,
    pub stats: StandardizationStats,
}

impl StandardizedSplit {
    pub fn new(data: &Dataset, train_rows: &[usize], test_rows: &[usize]) -> Result<Self> {
        let train = data.subset(train_rows);
        let stats = StandardizationStats::fit(&train)?;
        Ok(StandardizedSplit {
            train: stats.transform(&train)?,
            test: stats.transform(&data.subset(test_rows))?,
            stats,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dataset(n: usize, d: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Matrix::from_vec(n, d, (0..n * d).map(|_| rng.random_range(-5.0..20.0)).collect()).unwrap();
        let y = (0..n).map(|_| rng.random_range(100.0..300.0)).collect();
        let names = (0..d).map(|j| format!("f{j}")).collect();
        Dataset::new("rand", x, y, names, "y").unwrap()
    }

    #[test]
    fn train_columns_are_unit_scaled() {
        let data = random_dataset(80, 4, 1);
        let split = StandardizedSplit::new(&data, &(0..70).collect::<Vec<_>>(), &(70..80).collect::<Vec<_>>()).unwrap();
        for j in 0..4 {
            let col = split.train.x.column(j);
            let m = col.iter().sum::<f64>() / 70.0;
            let s = (col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / 70.0).sqrt();
            assert!(m.abs() < 1e-10 && (s - 1.0).abs() < 1e-10);
        }
        let m = split.train.y.iter().sum::<f64>() / 70.0;
        assert!(m.abs() < 1e-10);
    }

    #[test]
    fn target_round_trip() {
        let data = random_dataset(30, 2, 2);
        let stats = StandardizationStats::fit(&data).unwrap();
        for (z, y) in stats.transform_y(&data.y).iter().zip(&data.y) {
            assert!((stats.inverse_y(*z) - y).abs() < 1e-12);
        }
    }

    #[test]
    fn nll_change_of_variables() {
        // N(y | μ, σ²) in original units = N(z | μz, σz²) / σ_y, so the NLL
        // gains exactly log σ_y.
        let data = random_dataset(30, 2, 3);
        let stats = StandardizationStats::fit(&data).unwrap();
        let nll = |y: f64, mu: f64, var: f64| {
            0.5 * ((2.0 * std::f64::consts::PI * var).ln() + (y - mu) * (y - mu) / var)
        };
        let (mu_z, var_z) = (0.3, 0.7);
        for (z, y) in stats.transform_y(&data.y).iter().zip(&data.y) {
            let orig = nll(*y, stats.inverse_y(mu_z), stats.inverse_variance(var_z));
            let std = nll(*z, mu_z, var_z);
            assert!((orig - (std + stats.target_std.ln())).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_feature_is_named() {
        let mut data = random_dataset(20, 3, 4);
        for i in 0..20 {
            data.x[(i, 1)] = 7.5;
        }
        match StandardizationStats::fit(&data) {
            Err(Error::ConstantFeature { name, index }) => {
                assert_eq!(name, "f1");
                assert_eq!(index, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn constant_target_rejected() {
        let mut data = random_dataset(20, 2, 5);
        data.y.iter_mut().for_each(|v| *v = 3.0);
        assert!(matches!(StandardizationStats::fit(&data), Err(Error::Dataset { .. })));
    }

    #[test]
    fn test_rows_do_not_leak_into_stats() {
        let data = random_dataset(50, 3, 6);
        let train: Vec<usize> = (0..45).collect();
        let test: Vec<usize> = (45..50).collect();
        let a = StandardizedSplit::new(&data, &train, &test).unwrap();
        let mut mutated = data.clone();
        for &r in &test {
            mutated.y[r] = 1e6;
            mutated.x.row_mut(r).iter_mut().for_each(|v| *v = -1e6);
        }
        let b = StandardizedSplit::new(&mutated, &train, &test).unwrap();
        assert_eq!(a.stats, b.stats);
        assert_eq!(a.train, b.train);
    }
}
