//! Parallel ensembles of split networks, moment-matched aggregation and the
//! per-cluster baseline.

mod aggregate;
mod depc;
mod model;
mod train;

pub use aggregate::{aggregate, ClusterPredictive, EnsemblePrediction};
pub use depc::{DepcModel, DepcPrediction};
pub use model::{Ensemble, MemberCheckpoint, CHECKPOINT_VERSION};
pub(crate) use model::write_json;
pub use train::{fit_member, train_member, train_members, EnsembleConfig, MemberRun, TrainedMember};
