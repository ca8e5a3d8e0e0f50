use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::ClusterAssignment;
use crate::data::{Dataset, DatasetInfo};
use crate::error::{Error, Result};
use crate::math::{AdamConfig, OptimizerState};
use crate::model::{accumulate_gradients, GradientWorkspace, SplitArchitecture, SplitNetworkParams};
use crate::rng::{derive_seed, keyed_rng};

const INIT_STREAM: u64 = 0x696e_6974;
const SHUFFLE_STREAM: u64 = 0x7368_7566;

/// Settings shared by every member of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub members: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub hidden_units: usize,
    pub seed: u64,
    /// Train members on the rayon pool. Results do not depend on it.
    #[serde(default)]
    pub parallel: bool,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            members: 5,
            epochs: 40,
            batch_size: 100,
            learning_rate: 0.1,
            hidden_units: 50,
            seed: 0,
            parallel: false,
        }
    }
}

impl EnsembleConfig {
    /// Benchmark defaults for `info`, five members.
    pub fn for_benchmark(info: &DatasetInfo, seed: u64) -> Self {
        EnsembleConfig {
            members: 5,
            epochs: info.epochs,
            batch_size: info.batch_size,
            learning_rate: info.learning_rate,
            hidden_units: info.hidden_units,
            seed,
            parallel: false,
        }
    }

    /// Settings of the per-cluster baseline ensembles.
    pub fn depc(seed: u64) -> Self {
        EnsembleConfig {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.members == 0 {
            return Err(Error::Config("ensemble needs at least one member".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        if self.hidden_units == 0 {
            return Err(Error::Config("hidden units must be positive".into()));
        }
        AdamConfig::with_learning_rate(self.learning_rate).validate()
    }

    pub fn member_seed(&self, member: usize) -> u64 {
        derive_seed(self.seed, &[INIT_STREAM, member as u64])
    }
}

/// Outcome of training one member. On divergence, `params` holds the last
/// epoch-boundary parameters that were still finite.
#[derive(Debug)]
pub struct MemberRun {
    pub member: usize,
    pub seed: u64,
    pub params: SplitNetworkParams,
    /// Mean training NLL per completed epoch.
    pub curve: Vec<f64>,
    pub failure: Option<Error>,
}

/// A successfully trained member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedMember {
    pub member: usize,
    pub seed: u64,
    pub params: SplitNetworkParams,
    pub curve: Vec<f64>,
}

impl MemberRun {
    pub fn into_result(self) -> Result<TrainedMember> {
        match self.failure {
            Some(e) => Err(e),
            None => Ok(TrainedMember {
                member: self.member,
                seed: self.seed,
                params: self.params,
                curve: self.curve,
            }),
        }
    }
}

/// Shuffled mini-batch training of one split network on standardized data.
pub fn fit_member(
    train: &Dataset,
    assignment: &ClusterAssignment,
    config: &EnsembleConfig,
    member: usize,
) -> Result<MemberRun> {
    config.validate()?;
    if assignment.feature_count() != train.d() {
        return Err(Error::shape("cluster assignment features", train.d(), assignment.feature_count()));
    }
    let arch = SplitArchitecture::proportional(assignment, config.hidden_units)?;
    let seed = config.member_seed(member);
    let mut params = SplitNetworkParams::init(&arch, seed)?;
    let mut optimizer = OptimizerState::new(AdamConfig::with_learning_rate(config.learning_rate), params.len());
    let layout = params.layout().clone();
    let mut grad = vec![0.0; params.len()];
    let mut ws = GradientWorkspace::new(&arch);
    let mut order: Vec<usize> = (0..train.n()).collect();
    let mut curve = Vec::with_capacity(config.epochs);
    let mut last_good = params.values().to_vec();

    for epoch in 0..config.epochs {
        order.sort_unstable();
        order.shuffle(&mut keyed_rng(config.seed, &[SHUFFLE_STREAM, member as u64, epoch as u64]));
        let mut weighted = 0.0;
        let mut failure = None;
        for batch in order.chunks(config.batch_size) {
            let step = accumulate_gradients(&params, assignment, &train.x, &train.y, batch, &mut grad, &mut ws)
                .and_then(|loss| {
                    optimizer.step(params.values_mut(), &grad, &layout)?;
                    Ok(loss)
                });
            match step {
                Ok(loss) => weighted += loss * batch.len() as f64,
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            }
        }
        let epoch_loss = weighted / train.n() as f64;
        if failure.is_none() && !(epoch_loss.is_finite() && params.is_finite()) {
            failure = Some(Error::Numerical(format!("training NLL became {epoch_loss}")));
        }
        if let Some(source) = failure {
            params.set_values(last_good)?;
            return Ok(MemberRun {
                member,
                seed,
                params,
                curve,
                failure: Some(Error::Diverged {
                    member,
                    epoch,
                    source: Box::new(source),
                }),
            });
        }
        curve.push(epoch_loss);
        last_good.copy_from_slice(params.values());
    }
    Ok(MemberRun {
        member,
        seed,
        params,
        curve,
        failure: None,
    })
}

pub fn train_member(
    train: &Dataset,
    assignment: &ClusterAssignment,
    config: &EnsembleConfig,
    member: usize,
) -> Result<TrainedMember> {
    fit_member(train, assignment, config, member)?.into_result()
}

/// Trains all members, in parallel when `config.parallel` is set.
pub fn train_members(
    train: &Dataset,
    assignment: &ClusterAssignment,
    config: &EnsembleConfig,
) -> Result<Vec<TrainedMember>> {
    config.validate()?;
    if config.parallel {
        (0..config.members)
            .into_par_iter()
            .map(|e| train_member(train, assignment, config, e))
            .collect()
    } else {
        (0..config.members)
            .map(|e| train_member(train, assignment, config, e))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_toy, StandardizationStats, ToyKind, ToySpec};
    use crate::math::Matrix;
    use crate::model::mean_nll;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn standardized(data: &Dataset) -> (Dataset, StandardizationStats) {
        let stats = StandardizationStats::fit(data).unwrap();
        (stats.transform(data).unwrap(), stats)
    }

    fn small_config(epochs: usize) -> EnsembleConfig {
        EnsembleConfig {
            members: 2,
            epochs,
            batch_size: 8,
            learning_rate: 0.01,
            hidden_units: 20,
            seed: 3,
            parallel: false,
        }
    }

    #[test]
    fn zero_epochs_returns_init() {
        let (train, _) = standardized(&gen_toy(&ToySpec::new(ToyKind::Cubic2d), 0).unwrap());
        let a = ClusterAssignment::singletons(2);
        let cfg = small_config(0);
        let m = train_member(&train, &a, &cfg, 1).unwrap();
        let arch = SplitArchitecture::proportional(&a, cfg.hidden_units).unwrap();
        assert_eq!(m.params, SplitNetworkParams::init(&arch, cfg.member_seed(1)).unwrap());
        assert!(m.curve.is_empty());
    }

    #[test]
    fn cubic_toy_training_reduces_nll() {
        let (train, _) = standardized(&gen_toy(&ToySpec::new(ToyKind::Cubic1d), 1).unwrap());
        let a = ClusterAssignment::unified(1);
        let cfg = small_config(300);
        let arch = SplitArchitecture::proportional(&a, cfg.hidden_units).unwrap();
        let init = SplitNetworkParams::init(&arch, cfg.member_seed(0)).unwrap();
        let before = mean_nll(&init, &a, &train.x, &train.y).unwrap();
        let m = train_member(&train, &a, &cfg, 0).unwrap();
        let after = mean_nll(&m.params, &a, &train.x, &train.y).unwrap();
        assert!(after < before, "{after} >= {before}");
        assert_eq!(m.curve.len(), 300);
    }

    #[test]
    fn deterministic_and_parallel_invariant() {
        let (train, _) = standardized(&gen_toy(&ToySpec::new(ToyKind::Cubic2d), 2).unwrap());
        let a = ClusterAssignment::singletons(2);
        let mut cfg = small_config(20);
        cfg.members = 3;
        let seq = train_members(&train, &a, &cfg).unwrap();
        assert_eq!(seq, train_members(&train, &a, &cfg).unwrap());
        cfg.parallel = true;
        assert_eq!(seq, train_members(&train, &a, &cfg).unwrap());
        assert_ne!(seq[0].params, seq[1].params);
    }

    #[test]
    fn divergence_keeps_last_good_params() {
        let x = Matrix::from_vec(4, 1, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let data = Dataset::new("huge", x, vec![1e200, -1e200, 1e200, -1e200], vec!["x".into()], "y").unwrap();
        let a = ClusterAssignment::unified(1);
        let cfg = small_config(5);
        let run = fit_member(&data, &a, &cfg, 0).unwrap();
        let arch = SplitArchitecture::proportional(&a, cfg.hidden_units).unwrap();
        assert_eq!(run.params, SplitNetworkParams::init(&arch, cfg.member_seed(0)).unwrap());
        match run.into_result() {
            Err(Error::Diverged { member: 0, epoch: 0, source }) => {
                assert!(matches!(*source, Error::NonFiniteLoss { .. }), "{source}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn linear_data_recovers_generative_model() {
        // y = 2x + N(0, 0.5²): the fitted mean should track 2x and the
        // predicted standard deviation should sit near 0.5.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noise = Normal::new(0.0, 0.5).unwrap();
        let xs: Vec<f64> = (0..500).map(|_| rng.random_range(-2.0..2.0)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + noise.sample(&mut rng)).collect();
        let data = Dataset::new("linear", Matrix::from_vec(500, 1, xs).unwrap(), ys, vec!["x".into()], "y").unwrap();
        let (train, stats) = standardized(&data);
        let a = ClusterAssignment::unified(1);
        let cfg = EnsembleConfig {
            members: 5,
            epochs: 200,
            batch_size: 32,
            learning_rate: 0.01,
            hidden_units: 50,
            seed: 5,
            parallel: false,
        };
        let ens = super::super::Ensemble::train(&train, &a, &stats, &cfg).unwrap();
        for i in 0..=20 {
            let x = -1.8 + 3.6 * i as f64 / 20.0;
            let p = ens.predict(&[x]).unwrap();
            assert!((p.mean - 2.0 * x).abs() < 0.1, "x={x}: mean {}", p.mean);
            let sd = p.variances[0].sqrt();
            assert!((0.4..=0.6).contains(&sd), "x={x}: sd {sd}");
        }
    }
}
