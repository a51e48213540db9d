//! Dense linear algebra and the seeded random generator used everywhere else.

mod matrix;
mod rng;
mod vector;

pub use matrix::{matvec, rank_updates_bfgs, Matrix};
pub use rng::{uniform_init, Rng, Stream};
pub use vector::{dot, Vector};
