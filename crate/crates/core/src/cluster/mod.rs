//! Feature clustering: Pearson-correlation distance, complete-linkage
//! agglomeration, and a relative-threshold cut into an exhaustive partition.

mod assignment;
mod hierarchical;

pub use assignment::ClusterAssignment;
pub use hierarchical::{
    agglomerate, cluster_features, correlation_distance, correlation_matrix, cut, Dendrogram,
    DistanceTransform, Merge,
};
