//! Stochastic variance-reduced Nesterov-accelerated quasi-Newton training
//! (SVR-NAQ / SVR-LNAQ) together with the baselines it is measured against,
//! a small feed-forward network with analytic gradients, dataset handling and
//! an experiment harness.

// `!(x > 0.0)` style checks are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod harness;
pub mod model;
pub mod numerics;
pub mod objective;
pub mod optim;

pub use error::{Error, Result};
pub use numerics::{Matrix, Rng, Vector};
pub use objective::Objective;
