//! Epoch-driven optimizers.
//!
//! Every optimizer owns its parameter vector and advances it one epoch at a
//! time through [`Optimizer::run_epoch`]. Mini-batches come from a
//! [`BatchSampler`]; giving two optimizers samplers with the same seed gives
//! them the same batch stream.
//!
//! | name      | type                 | curvature            |
//! |-----------|----------------------|----------------------|
//! | sgd       | [`Sgd`]              | none                 |
//! | adam      | [`Adam`]             | none                 |
//! | svrg      | [`Svrg`]             | none                 |
//! | svrg2     | [`SvrgII`]           | dense, once per epoch |
//! | naq/lnaq  | [`Naq::full_batch`]  | dense / limited      |
//! | onaq/olnaq| [`Naq::online`]      | dense / limited, per iteration |
//! | svrnaq/svrlnaq | [`SvrNaq`]      | dense / limited, once per epoch |

mod adam;
mod curvature;
mod naq;
mod schedule;
mod svrg;
mod svrg2;
mod svrnaq;

pub use adam::{Adam, AdamConfig};
pub use curvature::{
    naq_hessian_update, two_loop_direction, CurvatureBuffer, CurvaturePair, InverseHessian, Memory,
    CURVATURE_SAFEGUARD,
};
pub use naq::{Naq, NaqConfig};
pub use schedule::{StepRule, StepSchedule};
pub use svrg::{svrg_reduced_gradient, Sgd, Svrg};
pub use svrg2::{SvrgII, SvrgIIConfig};
pub use svrnaq::{SvrNaq, SvrNaqConfig};

use crate::error::{Error, Result};
use crate::numerics::{Rng, Stream, Vector};
use crate::objective::Objective;

/// Step size of the SVRG bootstrap epoch.
pub const DEFAULT_SVRG_ALPHA: f64 = 0.025;

/// Cumulative work counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub full_grad_evals: u64,
    pub minibatch_grad_evals: u64,
    pub curvature_skips: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpochKind {
    /// The SVRG epoch that precedes curvature-based epochs.
    Bootstrap,
    Regular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpochReport {
    /// 1-based index of the epoch just completed.
    pub epoch: usize,
    pub kind: EpochKind,
    pub iterations: usize,
    /// Totals since construction.
    pub counters: Counters,
}

pub trait Optimizer {
    fn name(&self) -> &'static str;

    /// Current iterate.
    fn params(&self) -> &Vector;

    fn counters(&self) -> Counters;

    /// Runs one epoch, calling `observe` with the iterate after every inner
    /// step.
    fn run_epoch_observed(
        &mut self,
        objective: &dyn Objective,
        batches: &mut BatchSampler,
        observe: &mut dyn FnMut(&Vector),
    ) -> Result<EpochReport>;

    fn run_epoch(&mut self, objective: &dyn Objective, batches: &mut BatchSampler) -> Result<EpochReport> {
        self.run_epoch_observed(objective, batches, &mut |_| {})
    }
}

/// Mini-batches of `batch_size` indices drawn uniformly with replacement.
#[derive(Debug, Clone)]
pub struct BatchSampler {
    rng: Rng,
    n_samples: usize,
    batch_size: usize,
}

impl BatchSampler {
    pub fn new(seed: u64, n_samples: usize, batch_size: usize) -> Result<Self> {
        Self::from_rng(Rng::substream(seed, Stream::Batches), n_samples, batch_size)
    }

    pub fn from_rng(rng: Rng, n_samples: usize, batch_size: usize) -> Result<Self> {
        if batch_size == 0 || batch_size > n_samples {
            return Err(Error::Argument(format!(
                "batch size {batch_size} must be in 1..={n_samples}"
            )));
        }
        Ok(BatchSampler {
            rng,
            n_samples,
            batch_size,
        })
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// Inner iterations per epoch: one pass worth of samples, `⌈n / b⌉`.
    pub fn iterations_per_epoch(&self) -> usize {
        self.n_samples.div_ceil(self.batch_size)
    }

    pub fn next_batch(&mut self) -> Vec<usize> {
        (0..self.batch_size).map(|_| self.rng.index(self.n_samples)).collect()
    }
}

pub(crate) fn ensure_finite(v: &Vector, epoch: usize, iteration: usize, what: &'static str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Divergence {
            epoch,
            iteration,
            what,
        })
    }
}

pub(crate) fn check_momentum(mu: f64) -> Result<()> {
    if (0.0..1.0).contains(&mu) {
        Ok(())
    } else {
        Err(Error::Argument(format!("momentum must be in [0, 1), got {mu}")))
    }
}
