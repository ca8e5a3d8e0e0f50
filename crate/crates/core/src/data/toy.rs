use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::math::Matrix;
use crate::rng::keyed_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToyKind {
    /// `y = x³ + ε`
    Cubic1d,
    /// `y = (x₁³ + ε₁)(x₂³ + ε₂)`
    Cubic2d,
    /// `y = (x₁⁴ + ε₁)(x₂⁴ + ε₂)`
    Quartic2d,
}

impl ToyKind {
    pub fn dims(self) -> usize {
        match self {
            ToyKind::Cubic1d => 1,
            ToyKind::Cubic2d | ToyKind::Quartic2d => 2,
        }
    }

    /// Exponent applied to each input.
    pub fn power(self) -> i32 {
        match self {
            ToyKind::Cubic1d | ToyKind::Cubic2d => 3,
            ToyKind::Quartic2d => 4,
        }
    }

    pub fn default_n(self) -> usize {
        match self {
            ToyKind::Cubic1d => 20,
            ToyKind::Cubic2d | ToyKind::Quartic2d => 40,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ToyKind::Cubic1d => "cubic1d",
            ToyKind::Cubic2d => "cubic2d",
            ToyKind::Quartic2d => "quartic2d",
        }
    }
}

impl std::str::FromStr for ToyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cubic1d" => Ok(ToyKind::Cubic1d),
            "cubic2d" => Ok(ToyKind::Cubic2d),
            "quartic2d" => Ok(ToyKind::Quartic2d),
            other => Err(Error::Config(format!(
                "unknown toy dataset '{other}' (expected cubic1d, cubic2d or quartic2d)"
            ))),
        }
    }
}

/// Toy generator settings. Inputs are uniform on `[-range, range]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToySpec {
    pub kind: ToyKind,
    pub n: usize,
    pub range: f64,
    /// Noise standard deviation per input dimension.
    pub noise_std: Vec<f64>,
}

impl ToySpec {
    pub fn new(kind: ToyKind) -> Self {
        ToySpec {
            kind,
            n: kind.default_n(),
            range: 4.0,
            noise_std: vec![3.0; kind.dims()],
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_noise(mut self, std: f64) -> Self {
        self.noise_std = vec![std; self.kind.dims()];
        self
    }
}

pub fn gen_toy(spec: &ToySpec, seed: u64) -> Result<Dataset> {
    let d = spec.kind.dims();
    if spec.n < 2 {
        return Err(Error::Config(format!("toy dataset needs n >= 2, got {}", spec.n)));
    }
    if spec.noise_std.len() != d || spec.noise_std.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
        return Err(Error::Config(format!(
            "toy noise needs {d} non-negative standard deviations, got {:?}",
            spec.noise_std
        )));
    }
    if !(spec.range > 0.0) {
        return Err(Error::Config(format!("toy input range must be positive, got {}", spec.range)));
    }
    let mut rng = keyed_rng(seed, &[spec.kind as u64]);
    let noise: Vec<Normal<f64>> = spec
        .noise_std
        .iter()
        .map(|&s| Normal::new(0.0, s).expect("validated std"))
        .collect();
    let mut xs = Vec::with_capacity(spec.n * d);
    let mut y = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let mut prod = 1.0;
        for dist in &noise {
            let x: f64 = rng.random_range(-spec.range..=spec.range);
            prod *= x.powi(spec.kind.power()) + dist.sample(&mut rng);
            xs.push(x);
        }
        y.push(prod);
    }
    let names = (1..=d).map(|j| format!("x{j}")).collect();
    Dataset::new(spec.kind.name(), Matrix::from_vec(spec.n, d, xs)?, y, names, "y")
}
