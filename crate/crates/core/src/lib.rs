//! Deep split ensembles: neural-network regression with one predictive
//! variance per cluster of input features.

pub mod cluster;
pub mod config;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod math;
pub mod model;
pub mod plot;
pub mod protocol;
pub mod rng;

pub use error::{Error, ErrorClass, Result};
