use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exhaustive, non-overlapping partition of feature indices `0..d`.
///
/// Clusters are stored with ascending members and ordered by their smallest
/// member, so two assignments describing the same partition compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    clusters: Vec<Vec<usize>>,
    feature_count: usize,
}

impl ClusterAssignment {
    /// Validates a partition. `allow_unified` permits a single cluster.
    pub fn new(clusters: Vec<Vec<usize>>, feature_count: usize, allow_unified: bool) -> Result<Self> {
        let mut seen = vec![false; feature_count];
        for (ci, c) in clusters.iter().enumerate() {
            if c.is_empty() {
                return Err(Error::ClusterSpec(format!("cluster {ci} is empty")));
            }
            for &f in c {
                if f >= feature_count {
                    return Err(Error::ClusterSpec(format!(
                        "feature index {f} out of range for {feature_count} features"
                    )));
                }
                if seen[f] {
                    return Err(Error::ClusterSpec(format!("feature index {f} appears twice")));
                }
                seen[f] = true;
            }
        }
        if let Some(f) = seen.iter().position(|s| !s) {
            return Err(Error::ClusterSpec(format!("feature index {f} is not assigned")));
        }
        if clusters.len() == 1 && !allow_unified {
            return Err(Error::ClusterSpec(
                "a single cluster is only allowed for the unified baseline".into(),
            ));
        }
        Ok(Self::canonical(clusters, feature_count))
    }

    fn canonical(mut clusters: Vec<Vec<usize>>, feature_count: usize) -> Self {
        for c in &mut clusters {
            c.sort_unstable();
        }
        clusters.sort_by_key(|c| c[0]);
        ClusterAssignment {
            clusters,
            feature_count,
        }
    }

    /// One cluster per feature.
    pub fn singletons(feature_count: usize) -> Self {
        Self::canonical((0..feature_count).map(|f| vec![f]).collect(), feature_count)
    }

    /// All features in one cluster (k = 1), the plain deep-ensemble setting.
    pub fn unified(feature_count: usize) -> Self {
        Self::canonical(vec![(0..feature_count).collect()], feature_count)
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn cluster(&self, i: usize) -> &[usize] {
        &self.clusters[i]
    }

    pub fn k(&self) -> usize {
        self.clusters.len()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(Vec::len).collect()
    }

    /// Index of the cluster containing `feature`.
    pub fn cluster_of(&self, feature: usize) -> Option<usize> {
        self.clusters.iter().position(|c| c.contains(&feature))
    }

    pub fn named(&self, names: &[String]) -> Vec<Vec<String>> {
        self.clusters
            .iter()
            .map(|c| c.iter().map(|&f| names[f].clone()).collect())
            .collect()
    }

    /// Text form: one cluster per line, comma-separated feature names.
    pub fn to_spec_string(&self, names: &[String]) -> String {
        let mut out = String::new();
        for c in self.named(names) {
            out.push_str(&c.join(","));
            out.push('\n');
        }
        out
    }

    /// Parses the text form against the dataset's feature names. Blank lines
    /// and lines starting with `#` are ignored; names are trimmed.
    pub fn from_spec_str(text: &str, names: &[String], allow_unified: bool) -> Result<Self> {
        let index: HashMap<&str, usize> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let mut seen = vec![false; names.len()];
        let mut clusters = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cluster = Vec::new();
            for raw in line.split(',') {
                let name = raw.trim();
                if name.is_empty() {
                    continue;
                }
                let &f = index.get(name).ok_or_else(|| {
                    Error::ClusterSpec(format!("line {}: unknown feature '{name}'", lineno + 1))
                })?;
                if seen[f] {
                    return Err(Error::ClusterSpec(format!(
                        "line {}: duplicate feature '{name}'",
                        lineno + 1
                    )));
                }
                seen[f] = true;
                cluster.push(f);
            }
            if !cluster.is_empty() {
                clusters.push(cluster);
            }
        }
        if let Some(f) = seen.iter().position(|s| !s) {
            return Err(Error::ClusterSpec(format!(
                "feature '{}' is missing from the cluster spec",
                names[f]
            )));
        }
        Self::new(clusters, names.len(), allow_unified)
    }
}
