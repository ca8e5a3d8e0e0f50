use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{aggregate, train_members, EnsembleConfig, EnsemblePrediction, TrainedMember};
use crate::cluster::ClusterAssignment;
use crate::data::{Dataset, StandardizationStats};
use crate::error::{Error, Result};
use crate::math::Matrix;
use crate::model::{forward, SplitArchitecture, SplitNetworkParams};

pub const CHECKPOINT_VERSION: u32 = 1;

/// A trained deep split ensemble together with the statistics that map raw
/// inputs to the scale it was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub config: EnsembleConfig,
    pub assignment: ClusterAssignment,
    pub stats: StandardizationStats,
    pub members: Vec<TrainedMember>,
}

impl Ensemble {
    /// Trains on `train`, which must already be standardized with `stats`.
    pub fn train(
        train: &Dataset,
        assignment: &ClusterAssignment,
        stats: &StandardizationStats,
        config: &EnsembleConfig,
    ) -> Result<Self> {
        if stats.d() != train.d() {
            return Err(Error::shape("standardization statistics", train.d(), stats.d()));
        }
        Ok(Ensemble {
            config: config.clone(),
            assignment: assignment.clone(),
            stats: stats.clone(),
            members: train_members(train, assignment, config)?,
        })
    }

    pub fn k(&self) -> usize {
        self.assignment.k()
    }

    pub fn d(&self) -> usize {
        self.assignment.feature_count()
    }

    /// Prediction for a standardized input, in original target units.
    pub fn predict_standardized(&self, x: &[f64]) -> Result<EnsemblePrediction> {
        let preds = self
            .members
            .iter()
            .map(|m| forward(x, &m.params, &self.assignment))
            .collect::<Result<Vec<_>>>()?;
        let agg = aggregate(&preds)?;
        Ok(EnsemblePrediction {
            mean: self.stats.inverse_y(agg.mean),
            variances: agg
                .variances
                .iter()
                .map(|&v| self.stats.inverse_variance(v))
                .collect(),
        })
    }

    /// Prediction for a raw input, in original target units.
    pub fn predict(&self, x: &[f64]) -> Result<EnsemblePrediction> {
        if x.len() != self.d() {
            return Err(Error::shape("input features", self.d(), x.len()));
        }
        self.predict_standardized(&self.stats.transform_row(x))
    }

    pub fn predict_batch_standardized(&self, x: &Matrix) -> Result<Vec<EnsemblePrediction>> {
        if x.cols() != self.d() {
            return Err(Error::shape("input features", self.d(), x.cols()));
        }
        (0..x.rows())
            .into_par_iter()
            .map(|i| self.predict_standardized(x.row(i)))
            .collect()
    }

    pub fn predict_batch(&self, x: &Matrix) -> Result<Vec<EnsemblePrediction>> {
        self.predict_batch_standardized(&self.stats.transform_x(x)?)
    }

    /// Writes `member_<e>.json` files and a `manifest.json` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut files = Vec::new();
        for m in &self.members {
            let name = format!("member_{}.json", m.member);
            let ckpt = MemberCheckpoint::new(m, &self.assignment, &self.stats);
            write_json(&dir.join(&name), &ckpt)?;
            files.push(name);
        }
        let manifest = EnsembleManifest {
            version: CHECKPOINT_VERSION,
            config: self.config.clone(),
            assignment: self.assignment.clone(),
            stats: self.stats.clone(),
            member_seeds: self.members.iter().map(|m| m.seed).collect(),
            member_files: files,
        };
        write_json(&dir.join("manifest.json"), &manifest)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let manifest: EnsembleManifest = read_json(&dir.join("manifest.json"))?;
        check_version(&dir.join("manifest.json"), manifest.version)?;
        let members = manifest
            .member_files
            .iter()
            .map(|f| {
                let path = dir.join(f);
                let ckpt: MemberCheckpoint = read_json(&path)?;
                check_version(&path, ckpt.version)?;
                if ckpt.assignment != manifest.assignment || ckpt.stats != manifest.stats {
                    return Err(Error::Config(format!(
                        "{} disagrees with the ensemble manifest",
                        path.display()
                    )));
                }
                ckpt.into_member(&manifest.assignment)
            })
            .collect::<Result<Vec<_>>>()?;
        if members.is_empty() {
            return Err(Error::Config(format!("{} lists no members", dir.display())));
        }
        Ok(Ensemble {
            config: manifest.config,
            assignment: manifest.assignment,
            stats: manifest.stats,
            members,
        })
    }
}

/// Self-describing file for one trained member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberCheckpoint {
    pub version: u32,
    pub member: usize,
    pub seed: u64,
    pub architecture: SplitArchitecture,
    pub assignment: ClusterAssignment,
    pub stats: StandardizationStats,
    pub params: Vec<f64>,
    pub curve: Vec<f64>,
}

impl MemberCheckpoint {
    pub fn new(member: &TrainedMember, assignment: &ClusterAssignment, stats: &StandardizationStats) -> Self {
        MemberCheckpoint {
            version: CHECKPOINT_VERSION,
            member: member.member,
            seed: member.seed,
            architecture: member.params.architecture().clone(),
            assignment: assignment.clone(),
            stats: stats.clone(),
            params: member.params.values().to_vec(),
            curve: member.curve.clone(),
        }
    }

    pub fn into_member(self, assignment: &ClusterAssignment) -> Result<TrainedMember> {
        if !self.architecture.matches(assignment) {
            return Err(Error::Config(format!(
                "member {} architecture does not match the cluster assignment",
                self.member
            )));
        }
        let mut params = SplitNetworkParams::zeros(&self.architecture)?;
        params.set_values(self.params)?;
        if !params.is_finite() {
            return Err(Error::Numerical(format!("member {} has non-finite parameters", self.member)));
        }
        Ok(TrainedMember {
            member: self.member,
            seed: self.seed,
            params,
            curve: self.curve,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EnsembleManifest {
    version: u32,
    config: EnsembleConfig,
    assignment: ClusterAssignment,
    stats: StandardizationStats,
    member_seeds: Vec<u64>,
    member_files: Vec<String>,
}

fn check_version(path: &Path, version: u32) -> Result<()> {
    if version != CHECKPOINT_VERSION {
        return Err(Error::Config(format!(
            "{} has checkpoint version {version}, expected {CHECKPOINT_VERSION}",
            path.display()
        )));
    }
    Ok(())
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(PathBuf::from(path), e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}
