use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::objective::Objective;

use super::{ensure_finite, BatchSampler, Counters, EpochKind, EpochReport, Optimizer};

/// Variance-reduced gradient estimate `a − b + c`: mini-batch gradient at the
/// evaluation point, minus the same batch's gradient at the snapshot, plus the
/// snapshot's full gradient.
pub fn svrg_reduced_gradient(at_point: &Vector, at_snapshot: &Vector, full_grad: &Vector) -> Result<Vector> {
    Error::check_len(at_point.len(), at_snapshot.len())?;
    Error::check_len(at_point.len(), full_grad.len())?;
    Ok(at_point
        .iter()
        .zip(at_snapshot.iter())
        .zip(full_grad.iter())
        .map(|((a, b), c)| (a - b) + c)
        .collect())
}

pub(crate) struct SvrgPass {
    pub end: Vector,
    pub full_grad: Vector,
    pub iterations: usize,
}

/// One SVRG epoch from `snapshot` with constant step `alpha`.
pub(crate) fn svrg_pass(
    objective: &dyn Objective,
    snapshot: &Vector,
    alpha: f64,
    batches: &mut BatchSampler,
    counters: &mut Counters,
    epoch: usize,
    observe: &mut dyn FnMut(&Vector),
) -> Result<SvrgPass> {
    let full_grad = objective.full_gradient(snapshot)?;
    counters.full_grad_evals += 1;
    ensure_finite(&full_grad, epoch, 0, "full gradient")?;

    let n = batches.iterations_per_epoch();
    let mut x = snapshot.clone();
    for t in 0..n {
        let batch = batches.next_batch();
        let g_x = objective.batch_gradient(&x, &batch)?;
        let g_snap = objective.batch_gradient(snapshot, &batch)?;
        counters.minibatch_grad_evals += 2;
        let f = svrg_reduced_gradient(&g_x, &g_snap, &full_grad)?;
        ensure_finite(&f, epoch, t, "variance-reduced gradient")?;
        x.axpy(-alpha, &f)?;
        ensure_finite(&x, epoch, t, "iterate")?;
        observe(&x);
    }
    Ok(SvrgPass {
        end: x,
        full_grad,
        iterations: n,
    })
}

/// Stochastic variance-reduced gradient with a constant step.
#[derive(Debug, Clone)]
pub struct Svrg {
    alpha: f64,
    snapshot: Vector,
    epoch: usize,
    counters: Counters,
}

impl Svrg {
    pub fn new(w0: Vector, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::Argument(format!("invalid SVRG step {alpha}")));
        }
        Ok(Svrg {
            alpha,
            snapshot: w0,
            epoch: 0,
            counters: Counters::default(),
        })
    }
}

impl Optimizer for Svrg {
    fn name(&self) -> &'static str {
        "svrg"
    }

    fn params(&self) -> &Vector {
        &self.snapshot
    }

    fn counters(&self) -> Counters {
        self.counters
    }

    fn run_epoch_observed(
        &mut self,
        objective: &dyn Objective,
        batches: &mut BatchSampler,
        observe: &mut dyn FnMut(&Vector),
    ) -> Result<EpochReport> {
        Error::check_len(objective.dim(), self.snapshot.len())?;
        let pass = svrg_pass(
            objective,
            &self.snapshot,
            self.alpha,
            batches,
            &mut self.counters,
            self.epoch + 1,
            observe,
        )?;
        self.snapshot = pass.end;
        self.epoch += 1;
        Ok(EpochReport {
            epoch: self.epoch,
            kind: EpochKind::Regular,
            iterations: pass.iterations,
            counters: self.counters,
        })
    }
}

/// Plain mini-batch SGD with a constant step.
#[derive(Debug, Clone)]
pub struct Sgd {
    alpha: f64,
    x: Vector,
    epoch: usize,
    counters: Counters,
}

impl Sgd {
    pub fn new(w0: Vector, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::Argument(format!("invalid SGD step {alpha}")));
        }
        Ok(Sgd {
            alpha,
            x: w0,
            epoch: 0,
            counters: Counters::default(),
        })
    }
}

impl Optimizer for Sgd {
    fn name(&self) -> &'static str {
        "sgd"
    }

    fn params(&self) -> &Vector {
        &self.x
    }

    fn counters(&self) -> Counters {
        self.counters
    }

    fn run_epoch_observed(
        &mut self,
        objective: &dyn Objective,
        batches: &mut BatchSampler,
        observe: &mut dyn FnMut(&Vector),
    ) -> Result<EpochReport> {
        Error::check_len(objective.dim(), self.x.len())?;
        let epoch = self.epoch + 1;
        let n = batches.iterations_per_epoch();
        for t in 0..n {
            let batch = batches.next_batch();
            let g = objective.batch_gradient(&self.x, &batch)?;
            self.counters.minibatch_grad_evals += 1;
            ensure_finite(&g, epoch, t, "gradient")?;
            self.x.axpy(-self.alpha, &g)?;
            observe(&self.x);
        }
        self.epoch = epoch;
        Ok(EpochReport {
            epoch,
            kind: EpochKind::Regular,
            iterations: n,
            counters: self.counters,
        })
    }
}
