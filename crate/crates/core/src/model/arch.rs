use serde::{Deserialize, Serialize};

use crate::cluster::ClusterAssignment;
use crate::error::{Error, Result};

/// Hidden units given to each split of a single-hidden-layer split network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitArchitecture {
    pub cluster_sizes: Vec<usize>,
    pub hidden: Vec<usize>,
}

impl SplitArchitecture {
    /// Splits `total_hidden` units across clusters in proportion to their
    /// feature counts (largest remainder, at least one unit per split).
    pub fn proportional(assignment: &ClusterAssignment, total_hidden: usize) -> Result<Self> {
        let sizes = assignment.sizes();
        let hidden = allocate_hidden(&sizes, total_hidden)?;
        Ok(SplitArchitecture {
            cluster_sizes: sizes,
            hidden,
        })
    }

    pub fn explicit(cluster_sizes: Vec<usize>, hidden: Vec<usize>) -> Result<Self> {
        let arch = SplitArchitecture {
            cluster_sizes,
            hidden,
        };
        arch.validate()?;
        Ok(arch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cluster_sizes.is_empty() || self.cluster_sizes.len() != self.hidden.len() {
            return Err(Error::Config(format!(
                "architecture needs one hidden size per cluster: {:?} vs {:?}",
                self.cluster_sizes, self.hidden
            )));
        }
        if self.cluster_sizes.contains(&0) || self.hidden.contains(&0) {
            return Err(Error::Config(format!(
                "cluster sizes and hidden units must be positive: {self:?}"
            )));
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.hidden.len()
    }

    pub fn total_hidden(&self) -> usize {
        self.hidden.iter().sum()
    }

    pub fn input_dim(&self) -> usize {
        self.cluster_sizes.iter().sum()
    }

    pub fn matches(&self, assignment: &ClusterAssignment) -> bool {
        self.cluster_sizes == assignment.sizes()
    }
}

fn allocate_hidden(sizes: &[usize], total: usize) -> Result<Vec<usize>> {
    let k = sizes.len();
    if k == 0 {
        return Err(Error::Config("no clusters to allocate hidden units to".into()));
    }
    if total < k {
        return Err(Error::Config(format!(
            "{total} hidden units cannot cover {k} splits with at least one each"
        )));
    }
    let d: usize = sizes.iter().sum();
    let mut hidden: Vec<usize> = sizes.iter().map(|&m| m * total / d).collect();
    let mut order: Vec<usize> = (0..k).collect();
    // remainder of m*total/d, compared exactly in integers
    order.sort_by(|&a, &b| {
        let (ra, rb) = ((sizes[a] * total) % d, (sizes[b] * total) % d);
        rb.cmp(&ra).then(a.cmp(&b))
    });
    let mut left = total - hidden.iter().sum::<usize>();
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        hidden[i] += 1;
        left -= 1;
    }
    while let Some(z) = hidden.iter().position(|&h| h == 0) {
        let donor = (0..k)
            .max_by(|&a, &b| hidden[a].cmp(&hidden[b]).then(b.cmp(&a)))
            .expect("non-empty");
        hidden[donor] -= 1;
        hidden[z] += 1;
    }
    Ok(hidden)
}
