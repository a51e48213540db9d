//! The stochastic objective seen by every optimizer: a mean of per-sample
//! losses that can be evaluated on any index subset.

use std::cell::Cell;

use crate::error::Result;
use crate::numerics::Vector;

pub trait Objective {
    /// Parameter dimension.
    fn dim(&self) -> usize;

    /// Number of samples in the training set.
    fn n_samples(&self) -> usize;

    /// Mean loss over the samples in `batch`.
    fn batch_loss(&self, w: &Vector, batch: &[usize]) -> Result<f64>;

    /// Gradient of [`Objective::batch_loss`].
    fn batch_gradient(&self, w: &Vector, batch: &[usize]) -> Result<Vector>;

    fn full_loss(&self, w: &Vector) -> Result<f64> {
        let all: Vec<usize> = (0..self.n_samples()).collect();
        self.batch_loss(w, &all)
    }

    fn full_gradient(&self, w: &Vector) -> Result<Vector> {
        let all: Vec<usize> = (0..self.n_samples()).collect();
        self.batch_gradient(w, &all)
    }
}

/// Wraps an objective and counts the gradient calls that reach it.
pub struct CountingObjective<'a, O: Objective + ?Sized> {
    inner: &'a O,
    full: Cell<u64>,
    minibatch: Cell<u64>,
}

impl<'a, O: Objective + ?Sized> CountingObjective<'a, O> {
    pub fn new(inner: &'a O) -> Self {
        CountingObjective {
            inner,
            full: Cell::new(0),
            minibatch: Cell::new(0),
        }
    }

    pub fn full_gradient_calls(&self) -> u64 {
        self.full.get()
    }

    pub fn minibatch_gradient_calls(&self) -> u64 {
        self.minibatch.get()
    }
}

impl<O: Objective + ?Sized> Objective for CountingObjective<'_, O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn n_samples(&self) -> usize {
        self.inner.n_samples()
    }

    fn batch_loss(&self, w: &Vector, batch: &[usize]) -> Result<f64> {
        self.inner.batch_loss(w, batch)
    }

    fn batch_gradient(&self, w: &Vector, batch: &[usize]) -> Result<Vector> {
        self.minibatch.set(self.minibatch.get() + 1);
        self.inner.batch_gradient(w, batch)
    }

    fn full_loss(&self, w: &Vector) -> Result<f64> {
        self.inner.full_loss(w)
    }

    fn full_gradient(&self, w: &Vector) -> Result<Vector> {
        self.full.set(self.full.get() + 1);
        self.inner.full_gradient(w)
    }
}
