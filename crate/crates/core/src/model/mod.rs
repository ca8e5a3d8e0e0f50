//! The split network: one trunk per feature cluster, a shared mean head over
//! all trunk activations, and one variance head per cluster.

mod arch;
mod network;

pub use arch::SplitArchitecture;
pub use network::{
    accumulate_gradients, forward, forward_batch, loss_and_gradients, mean_gradient,
    mean_gradient_terms, mean_nll, nll_loss, GradientWorkspace, SplitNetworkParams,
    SplitPrediction, VARIANCE_BIAS_INIT, VARIANCE_FLOOR, VARIANCE_WEIGHT_GAIN,
};
