//! Dense numerics for the split network: matrices, activations, Adam and a
//! finite-difference gradient checker.

mod gradcheck;
mod matrix;
mod optim;

pub use gradcheck::gradient_check;
pub use matrix::{dense_forward, relu, relu_scalar, sigmoid, softplus, softplus_scalar, Matrix};
pub use optim::{AdamConfig, OptimizerState, ParamBlock, ParamLayout};
