//! Run configuration: benchmark defaults, overridden by a `key = value`
//! file, overridden in turn by command-line settings.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cluster::DistanceTransform;
use crate::data::{benchmark_info, ToyKind, DEFAULT_TEST_FRACTION};
use crate::ensemble::EnsembleConfig;
use crate::error::{Error, Result};

/// How feature clusters are chosen for a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterMode {
    Hierarchical,
    /// Clusters read from a spec file.
    Spec(PathBuf),
    Singletons,
    Unified,
}

impl std::str::FromStr for ClusterMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "hierarchical" => ClusterMode::Hierarchical,
            "singletons" | "singleton" => ClusterMode::Singletons,
            "unified" => ClusterMode::Unified,
            other => match other.strip_prefix("spec:") {
                Some(path) if !path.is_empty() => ClusterMode::Spec(PathBuf::from(path)),
                _ => {
                    return Err(Error::Config(format!(
                        "unknown cluster mode '{other}' (expected hierarchical, singletons, unified or spec:<file>)"
                    )))
                }
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: String,
    pub data: Option<PathBuf>,
    pub target: Option<String>,
    pub clusters: ClusterMode,
    pub threshold: f64,
    pub distance: DistanceTransform,
    pub members: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub hidden_units: usize,
    pub folds: usize,
    /// Train only the first `max_folds` folds when set.
    pub max_folds: Option<usize>,
    pub test_fraction: f64,
    pub seed: u64,
    pub depc: bool,
}

impl RunConfig {
    /// Defaults for `dataset`, taken from the benchmark table when the name
    /// is known and from generic values otherwise.
    pub fn for_dataset(dataset: &str) -> Self {
        let generic = EnsembleConfig::default();
        let mut cfg = RunConfig {
            dataset: dataset.to_ascii_lowercase(),
            data: None,
            target: None,
            clusters: ClusterMode::Hierarchical,
            threshold: 0.5,
            distance: DistanceTransform::Signed,
            members: 5,
            epochs: generic.epochs,
            batch_size: generic.batch_size,
            learning_rate: generic.learning_rate,
            hidden_units: generic.hidden_units,
            folds: 20,
            max_folds: None,
            test_fraction: DEFAULT_TEST_FRACTION,
            seed: 0,
            depc: false,
        };
        if let Some(info) = benchmark_info(dataset) {
            cfg.threshold = info.cluster_threshold;
            cfg.distance = info.distance;
            cfg.epochs = info.epochs;
            cfg.batch_size = info.batch_size;
            cfg.learning_rate = info.learning_rate;
            cfg.hidden_units = info.hidden_units;
            cfg.folds = info.folds;
        } else if dataset.parse::<ToyKind>().is_ok() {
            cfg.clusters = ClusterMode::Singletons;
            cfg.epochs = 1000;
            cfg.batch_size = 40;
            cfg.learning_rate = 0.01;
            cfg.folds = 1;
        }
        cfg
    }

    /// Sets one field from its textual key and value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("invalid value '{value}' for '{key}'")))
        }
        let key_norm = key.replace('-', "_");
        match key_norm.as_str() {
            "dataset" => self.dataset = value.to_ascii_lowercase(),
            "data" => self.data = Some(PathBuf::from(value)),
            "target" => self.target = Some(value.to_string()),
            "clusters" => self.clusters = value.parse()?,
            "cluster_spec" => self.clusters = ClusterMode::Spec(PathBuf::from(value)),
            "threshold" => self.threshold = parse(key, value)?,
            "distance" => self.distance = value.parse()?,
            "members" | "ensemble_size" => self.members = parse(key, value)?,
            "epochs" => self.epochs = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "learning_rate" | "lr" => self.learning_rate = parse(key, value)?,
            "hidden_units" | "hidden" => self.hidden_units = parse(key, value)?,
            "folds" => self.folds = parse(key, value)?,
            "max_folds" => self.max_folds = Some(parse(key, value)?),
            "test_fraction" => self.test_fraction = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "depc" => self.depc = parse(key, value)?,
            _ => return Err(Error::Config(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text`. Blank lines and lines
    /// starting with `#` are ignored. `dataset` is applied first so that its
    /// table defaults do not override explicit settings.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        let pairs = parse_pairs(text, origin)?;
        if let Some((_, ds)) = pairs.iter().find(|(k, _)| k == "dataset") {
            let keep_seed = self.seed;
            *self = RunConfig {
                seed: keep_seed,
                ..RunConfig::for_dataset(ds)
            };
        }
        for (k, v) in pairs.iter().filter(|(k, _)| k != "dataset") {
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::Config(format!("threshold must lie in (0, 1], got {}", self.threshold)));
        }
        if self.folds == 0 || self.max_folds == Some(0) {
            return Err(Error::Config("fold count must be positive".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config(format!("test fraction must lie in (0, 1), got {}", self.test_fraction)));
        }
        self.ensemble(false).validate()
    }

    pub fn ensemble(&self, parallel: bool) -> EnsembleConfig {
        EnsembleConfig {
            members: self.members,
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            hidden_units: self.hidden_units,
            seed: self.seed,
            parallel,
        }
    }

    pub fn data_path(&self) -> PathBuf {
        self.data
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("data/uci/{}.csv", self.dataset)))
    }

    pub fn fold_count(&self) -> usize {
        self.max_folds.map_or(self.folds, |m| m.min(self.folds))
    }
}

/// `key = value` pairs of a config text, in order.
pub fn parse_pairs(text: &str, origin: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("{origin}:{}: expected 'key = value', got '{line}'", i + 1))
        })?;
        let (k, v) = (k.trim(), v.trim().trim_matches('"'));
        if k.is_empty() {
            return Err(Error::Config(format!("{origin}:{}: empty key", i + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boston_defaults_match_table() {
        let c = RunConfig::for_dataset("Boston");
        assert_eq!((c.learning_rate, c.epochs, c.batch_size), (0.1, 1000, 100));
        assert_eq!((c.hidden_units, c.folds, c.members), (50, 20, 5));
        let p = RunConfig::for_dataset("protein");
        assert_eq!((p.hidden_units, p.folds, p.batch_size, p.epochs), (100, 5, 1024, 4000));
        let y = RunConfig::for_dataset("yacht");
        assert_eq!((y.learning_rate, y.epochs, y.batch_size), (0.01, 1500, 8));
        let t = RunConfig::for_dataset("cubic2d");
        assert_eq!(t.clusters, ClusterMode::Singletons);
    }

    #[test]
    fn file_then_overrides() {
        let mut c = RunConfig::for_dataset("toy");
        c.apply_text("# comment\nepochs = 5\ndataset = concrete\n\nlr=0.5\n", "t").unwrap();
        assert_eq!(c.dataset, "concrete");
        assert_eq!(c.epochs, 5);
        assert_eq!(c.learning_rate, 0.5);
        assert_eq!(c.batch_size, 32);
        assert_eq!(c.threshold, 0.75);
        c.set("clusters", "spec:power.txt").unwrap();
        assert_eq!(c.clusters, ClusterMode::Spec("power.txt".into()));
        c.set("max-folds", "3").unwrap();
        assert_eq!(c.fold_count(), 3);
    }

    #[test]
    fn bad_entries_are_config_errors() {
        let mut c = RunConfig::for_dataset("boston");
        assert!(matches!(c.apply_text("epochs 5", "t"), Err(Error::Config(_))));
        assert!(matches!(c.set("epochs", "many"), Err(Error::Config(_))));
        assert!(matches!(c.set("colour", "red"), Err(Error::Config(_))));
        c.threshold = 0.0;
        assert!(c.validate().is_err());
    }
}
