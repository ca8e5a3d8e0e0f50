//! Argument parsing and config resolution for the command-line tool.

pub mod commands;
pub mod rundir;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use split_ensemble::config::{parse_pairs, RunConfig};
use split_ensemble::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "split-ensemble", version, about = "Deep split ensembles for regression with per-cluster uncertainty")]
pub struct Cli {
    /// Base random seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Config file of `key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Root directory for run outputs.
    #[arg(long, global = true, default_value = "runs")]
    pub out: PathBuf,
    /// Worker threads; more than one enables member-level parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Extra config override, repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster a dataset's features and write a cluster spec and dendrogram.
    Cluster(ClusterArgs),
    /// Train split ensembles on each fold and report test metrics.
    Train(TrainArgs),
    /// Evaluate a saved ensemble on a CSV.
    Eval(CheckpointArgs),
    /// Entropy of each cluster's predictive distribution under input shift.
    Ood(OodArgs),
    /// Interval calibration curves of a saved ensemble.
    Calibrate(CheckpointArgs),
    /// Train on a toy problem and write predictive bands over a grid.
    Toy(ToyArgs),
}

#[derive(Debug, Args, Default)]
pub struct DataArgs {
    /// Dataset name; selects the default hyperparameters and data path.
    #[arg(long)]
    pub dataset: Option<String>,
    /// CSV path (defaults to data/uci/<dataset>.csv).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Target column (defaults to the last column).
    #[arg(long)]
    pub target: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct ClusterOpts {
    /// Relative dendrogram cut in (0, 1].
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Correlation distance: signed (1 - r) or absolute (1 - |r|).
    #[arg(long)]
    pub distance: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct TrainOpts {
    /// hierarchical, singletons, unified or spec:<file>.
    #[arg(long)]
    pub clusters: Option<String>,
    #[arg(long)]
    pub members: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub hidden: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub cluster: ClusterOpts,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub cluster: ClusterOpts,
    #[command(flatten)]
    pub train: TrainOpts,
    #[arg(long)]
    pub folds: Option<usize>,
    /// Train only the first N folds.
    #[arg(long)]
    pub max_folds: Option<usize>,
    /// Also train the per-cluster baseline on each fold.
    #[arg(long)]
    pub depc: bool,
}

#[derive(Debug, Args)]
pub struct CheckpointArgs {
    /// Saved ensemble directory.
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// CSV in original units with the target column.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub target: Option<String>,
}

#[derive(Debug, Args)]
pub struct OodArgs {
    #[command(flatten)]
    pub input: CheckpointArgs,
    /// Two features to shift, by name or index, from different clusters.
    /// Chosen at random from two clusters when omitted.
    #[arg(long, value_delimiter = ',')]
    pub features: Vec<String>,
    #[arg(long, default_value_t = 6.0)]
    pub noise_mean: f64,
    #[arg(long, default_value_t = 2.0)]
    pub noise_std: f64,
}

#[derive(Debug, Args)]
pub struct ToyArgs {
    /// cubic1d, cubic2d or quartic2d.
    #[arg(long, default_value = "cubic1d")]
    pub kind: String,
    /// Number of training points.
    #[arg(long)]
    pub n: Option<usize>,
    /// Noise standard deviation on every input.
    #[arg(long, default_value_t = 3.0)]
    pub noise: f64,
    #[command(flatten)]
    pub train: TrainOpts,
}

fn push<T: ToString>(pairs: &mut Vec<(String, String)>, key: &str, v: &Option<T>) {
    if let Some(v) = v {
        pairs.push((key.to_string(), v.to_string()));
    }
}

impl DataArgs {
    fn pairs(&self, out: &mut Vec<(String, String)>) {
        push(out, "data", &self.data.as_ref().map(|p| p.display()));
        push(out, "target", &self.target);
    }
}

impl ClusterOpts {
    fn pairs(&self, out: &mut Vec<(String, String)>) {
        push(out, "threshold", &self.threshold);
        push(out, "distance", &self.distance);
    }
}

impl TrainOpts {
    fn pairs(&self, out: &mut Vec<(String, String)>) {
        push(out, "clusters", &self.clusters);
        push(out, "members", &self.members);
        push(out, "epochs", &self.epochs);
        push(out, "batch_size", &self.batch_size);
        push(out, "learning_rate", &self.lr);
        push(out, "hidden_units", &self.hidden);
    }
}

impl Cli {
    fn set_pairs(&self) -> Result<Vec<(String, String)>> {
        self.set
            .iter()
            .map(|s| {
                s.split_once('=')
                    .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                    .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{s}'")))
            })
            .collect()
    }

    fn file_pairs(&self) -> Result<Vec<(String, String)>> {
        match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| rundir::io_err(path, e))?;
                parse_pairs(&text, &path.display().to_string())
            }
            None => Ok(Vec::new()),
        }
    }

    /// Defaults for the dataset, then the config file, then `--set`, then
    /// subcommand flags, then `--seed`.
    pub fn resolve(&self, dataset: Option<&str>, data: Option<&Path>, flags: Vec<(String, String)>) -> Result<RunConfig> {
        let file = self.file_pairs()?;
        let sets = self.set_pairs()?;
        let from = |pairs: &[(String, String)]| pairs.iter().rev().find(|(k, _)| k == "dataset").map(|(_, v)| v.clone());
        let name = dataset
            .map(str::to_string)
            .or_else(|| from(&sets))
            .or_else(|| from(&file))
            .or_else(|| data.and_then(|p| p.file_stem()).map(|s| s.to_string_lossy().into_owned()))
            .ok_or_else(|| Error::Config("no dataset given; pass --dataset or --data".into()))?;
        let mut cfg = RunConfig::for_dataset(&name);
        for (k, v) in file.iter().chain(&sets).chain(&flags) {
            if k != "dataset" {
                cfg.set(k, v)?;
            }
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Seed for commands that need no run config.
    pub fn plain_seed(&self) -> Result<u64> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        let mut seed = 0;
        for (k, v) in self.file_pairs()?.iter().chain(&self.set_pairs()?) {
            if k == "seed" {
                seed = v.parse().map_err(|_| Error::Config(format!("invalid seed '{v}'")))?;
            }
        }
        Ok(seed)
    }

    pub fn parallel(&self) -> bool {
        self.threads.is_some_and(|t| t > 1)
    }
}

pub fn cluster_flags(args: &ClusterArgs) -> Vec<(String, String)> {
    let mut v = Vec::new();
    args.data.pairs(&mut v);
    args.cluster.pairs(&mut v);
    v
}

pub fn train_flags(args: &TrainArgs) -> Vec<(String, String)> {
    let mut v = Vec::new();
    args.data.pairs(&mut v);
    args.cluster.pairs(&mut v);
    args.train.pairs(&mut v);
    push(&mut v, "folds", &args.folds);
    push(&mut v, "max_folds", &args.max_folds);
    if args.depc {
        v.push(("depc".into(), "true".into()));
    }
    v
}

pub fn toy_flags(args: &ToyArgs) -> Vec<(String, String)> {
    let mut v = Vec::new();
    args.train.pairs(&mut v);
    v
}
