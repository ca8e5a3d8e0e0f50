//! Metrics and analyses of trained ensembles: RMSE, per-cluster NLL,
//! entropy under input shift, and interval calibration.

mod calibration;
mod kde;
mod metrics;
mod ood;
mod quantile;
mod report;

pub use calibration::{calibration_curve, CalibrationCurve, DEFAULT_LEVELS};
pub use kde::{silverman_bandwidth, Kde};
pub use metrics::{cluster_nll, gaussian_entropy, gaussian_nll, mean, point_predictions, rmse};
pub use ood::{
    cluster_entropies, entropy_analysis, entropy_report, inject_shift, ConditionEntropy, DensityCurve,
    EntropyReport, ShiftSpec,
};
pub use quantile::{standard_normal_cdf, standard_normal_quantile};
pub use report::{
    write_calibration_csv, write_density_csv, write_entropy_csv, CrossFoldSummary, EvaluationReport, Summary,
};
