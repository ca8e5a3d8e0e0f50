use serde::{Deserialize, Serialize};

use super::ClusterAssignment;
use crate::error::{Error, Result};
use crate::math::Matrix;

/// How a Pearson correlation `r` becomes a dissimilarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceTransform {
    /// `1 - r`: anti-correlated features are far apart.
    #[default]
    Signed,
    /// `1 - |r|`: anti-correlated features are as close as correlated ones.
    Absolute,
}

impl std::str::FromStr for DistanceTransform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "signed" | "1-r" => Ok(DistanceTransform::Signed),
            "absolute" | "abs" | "1-|r|" => Ok(DistanceTransform::Absolute),
            other => Err(Error::Config(format!("unknown distance transform '{other}'"))),
        }
    }
}

impl std::fmt::Display for DistanceTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DistanceTransform::Signed => "signed",
            DistanceTransform::Absolute => "absolute",
        })
    }
}

/// One agglomeration step. Leaves are nodes `0..d`; step `j` creates node `d + j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub distance: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub leaves: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn max_distance(&self) -> f64 {
        self.merges.iter().map(|m| m.distance).fold(0.0, f64::max)
    }
}

/// Sample Pearson correlation matrix of the columns of `x`.
///
/// `names` is used only to label errors; it may be empty.
pub fn correlation_matrix(x: &Matrix, names: &[String]) -> Result<Matrix> {
    let (n, d) = (x.rows(), x.cols());
    if n < 2 {
        return Err(Error::Config(format!(
            "correlation needs at least 2 rows, got {n}"
        )));
    }
    let nf = n as f64;
    let mut centered = x.clone();
    let mut norms = vec![0.0; d];
    for j in 0..d {
        let mean = (0..n).map(|i| x[(i, j)]).sum::<f64>() / nf;
        let mut ss = 0.0;
        for i in 0..n {
            let c = x[(i, j)] - mean;
            centered[(i, j)] = c;
            ss += c * c;
        }
        // relative test so that large-magnitude constant columns are caught
        let scale = (0..n).map(|i| x[(i, j)].abs()).fold(0.0, f64::max).max(1.0);
        if ss.sqrt() <= 1e-12 * scale * nf.sqrt() {
            return Err(Error::ConstantFeature {
                name: names.get(j).cloned().unwrap_or_else(|| format!("feature {j}")),
                index: j,
            });
        }
        norms[j] = ss.sqrt();
    }
    let mut r = Matrix::identity(d);
    for a in 0..d {
        for b in (a + 1)..d {
            let dot: f64 = (0..n).map(|i| centered[(i, a)] * centered[(i, b)]).sum();
            let v = (dot / (norms[a] * norms[b])).clamp(-1.0, 1.0);
            r[(a, b)] = v;
            r[(b, a)] = v;
        }
    }
    Ok(r)
}

/// Elementwise dissimilarity from a correlation matrix, with exact zero diagonal.
pub fn correlation_distance(r: &Matrix, transform: DistanceTransform) -> Matrix {
    let mut d = r.map(|v| match transform {
        DistanceTransform::Signed => 1.0 - v,
        DistanceTransform::Absolute => 1.0 - v.abs(),
    });
    for i in 0..d.rows() {
        d[(i, i)] = 0.0;
    }
    d
}

/// Complete-linkage agglomerative clustering of a dissimilarity matrix.
///
/// Equal distances are resolved by the lowest `(left, right)` node-id pair.
pub fn agglomerate(dist: &Matrix) -> Result<Dendrogram> {
    let d = dist.rows();
    if dist.cols() != d {
        return Err(Error::shape("agglomerate distance matrix", "square", format!("{}x{}", d, dist.cols())));
    }
    if d < 2 {
        return Err(Error::Config(format!(
            "hierarchical clustering needs at least 2 features, got {d}"
        )));
    }

    // Active clusters by node id; `between[a][b]` holds the current linkage
    // distance between active slots a and b.
    let mut node_of_slot: Vec<usize> = (0..d).collect();
    let mut size_of_slot = vec![1usize; d];
    let mut active = vec![true; d];
    let mut between: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| dist[(i, j)]).collect())
        .collect();

    let mut merges = Vec::with_capacity(d - 1);
    for step in 0..d - 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for a in 0..d {
            if !active[a] {
                continue;
            }
            for b in (a + 1)..d {
                if !active[b] {
                    continue;
                }
                let (na, nb) = (node_of_slot[a], node_of_slot[b]);
                let key = (na.min(nb), na.max(nb));
                let dv = between[a][b];
                let better = match best {
                    None => true,
                    Some((bd, _, _, l, r)) => dv < bd || (dv == bd && key < (l, r)),
                };
                if better {
                    best = Some((dv, a, b, key.0, key.1));
                }
            }
        }
        let (distance, a, b, left, right) = best.expect("at least two active clusters");
        merges.push(Merge {
            left,
            right,
            distance,
            size: size_of_slot[a] + size_of_slot[b],
        });
        for c in 0..d {
            if active[c] && c != a && c != b {
                let v = between[a][c].max(between[b][c]);
                between[a][c] = v;
                between[c][a] = v;
            }
        }
        active[b] = false;
        node_of_slot[a] = d + step;
        size_of_slot[a] += size_of_slot[b];
    }
    Ok(Dendrogram { leaves: d, merges })
}

/// Flat clusters from all merges strictly below `relative_threshold × max merge distance`.
pub fn cut(
    dendrogram: &Dendrogram,
    relative_threshold: f64,
    allow_unified: bool,
) -> Result<ClusterAssignment> {
    if !(relative_threshold > 0.0 && relative_threshold <= 1.0) {
        return Err(Error::Config(format!(
            "relative threshold must lie in (0, 1], got {relative_threshold}"
        )));
    }
    let d = dendrogram.leaves;
    let threshold = relative_threshold * dendrogram.max_distance();

    // union-find over nodes; merge nodes map to their left child's root
    let mut parent: Vec<usize> = (0..d).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut rep: Vec<usize> = (0..d).collect();
    for m in &dendrogram.merges {
        let (l, r) = (rep[m.left], rep[m.right]);
        if m.distance < threshold {
            let (rl, rr) = (find(&mut parent, l), find(&mut parent, r));
            parent[rr] = rl;
        }
        rep.push(l);
    }

    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; d];
    for f in 0..d {
        let root = find(&mut parent, f);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(f);
    }
    if groups.len() == 1 && !allow_unified {
        return Err(Error::SingleCluster {
            threshold: relative_threshold,
        });
    }
    ClusterAssignment::new(groups, d, allow_unified)
}

/// Correlation, distance, agglomeration and cut in one call.
pub fn cluster_features(
    x: &Matrix,
    names: &[String],
    transform: DistanceTransform,
    relative_threshold: f64,
    allow_unified: bool,
) -> Result<(Dendrogram, ClusterAssignment)> {
    let r = correlation_matrix(x, names)?;
    let dendrogram = agglomerate(&correlation_distance(&r, transform))?;
    let assignment = cut(&dendrogram, relative_threshold, allow_unified)?;
    Ok((dendrogram, assignment))
}
