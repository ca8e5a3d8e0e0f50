//! Datasets, fold protocol, standardization and toy generators.

mod dataset;
mod folds;
mod standardize;
mod toy;

pub use dataset::{
    benchmark_info, load_cluster_spec, load_dataset, write_cluster_spec, write_dataset, Dataset,
    DatasetInfo, BENCHMARKS,
};
pub use folds::{make_folds, FoldManifest, FoldSplit, DEFAULT_TEST_FRACTION};
pub use standardize::{StandardizationStats, StandardizedSplit};
pub use toy::{gen_toy, ToyKind, ToySpec};
