//! Nesterov-accelerated quasi-Newton, either full batch (NAQ / LNAQ, or
//! BFGS / L-BFGS with `μ = 0`) or online (oNAQ / oLNAQ).
//!
//! Each iteration evaluates the gradient at the look-ahead point
//! `u = x + μ v`, steps `v ← μ v − α_t H ∇E(u)`, `x ← x + v`, then evaluates
//! the gradient at the new `x` on the same batch to form the pair
//! `p = x − u`, `q = ∇E(x) − ∇E(u)`. The online variant therefore costs two
//! mini-batch gradients per iteration and never mixes batches within a pair.

use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::objective::Objective;

use super::{
    check_momentum, ensure_finite, BatchSampler, Counters, CurvaturePair, EpochKind, EpochReport,
    InverseHessian, Memory, Optimizer, StepSchedule,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaqConfig {
    pub mu: f64,
    pub schedule: StepSchedule,
    pub memory: Memory,
}

impl NaqConfig {
    pub fn new(mu: f64, alpha0: f64, memory: Memory) -> Result<Self> {
        Ok(NaqConfig {
            mu,
            schedule: StepSchedule::inverse_sqrt(alpha0)?,
            memory,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sampling {
    /// One full-gradient iteration per epoch.
    FullBatch,
    /// `⌈n / b⌉` mini-batch iterations per epoch.
    Online,
}

#[derive(Debug, Clone)]
pub struct Naq {
    config: NaqConfig,
    sampling: Sampling,
    x: Vector,
    v: Vector,
    hessian: InverseHessian,
    epoch: usize,
    counters: Counters,
}

impl Naq {
    pub fn online(w0: Vector, config: NaqConfig) -> Result<Self> {
        Self::new(w0, config, Sampling::Online)
    }

    pub fn full_batch(w0: Vector, config: NaqConfig) -> Result<Self> {
        Self::new(w0, config, Sampling::FullBatch)
    }

    fn new(w0: Vector, config: NaqConfig, sampling: Sampling) -> Result<Self> {
        check_momentum(config.mu)?;
        let d = w0.len();
        Ok(Naq {
            config,
            sampling,
            hessian: InverseHessian::new(config.memory, d)?,
            v: Vector::zeros(d),
            x: w0,
            epoch: 0,
            counters: Counters::default(),
        })
    }

    pub fn hessian(&self) -> &InverseHessian {
        &self.hessian
    }

    pub fn velocity(&self) -> &Vector {
        &self.v
    }

    fn step(&mut self, objective: &dyn Objective, batch: Option<&[usize]>, epoch: usize, t: usize) -> Result<()> {
        let mu = self.config.mu;
        let grad = |w: &Vector, counters: &mut Counters| -> Result<Vector> {
            match batch {
                Some(b) => {
                    counters.minibatch_grad_evals += 1;
                    objective.batch_gradient(w, b)
                }
                None => {
                    counters.full_grad_evals += 1;
                    objective.full_gradient(w)
                }
            }
        };

        let mut lookahead = self.x.clone();
        lookahead.axpy(mu, &self.v)?;
        let g_look = grad(&lookahead, &mut self.counters)?;
        ensure_finite(&g_look, epoch, t, "look-ahead gradient")?;

        let direction = self.hessian.direction(&g_look)?;
        self.v.scale(mu);
        self.v.axpy(self.config.schedule.at_index(t), &direction)?;
        self.x.axpy(1.0, &self.v)?;
        ensure_finite(&self.x, epoch, t, "iterate")?;

        let g_new = grad(&self.x, &mut self.counters)?;
        ensure_finite(&g_new, epoch, t, "gradient")?;
        let pair = CurvaturePair::new(self.x.sub(&lookahead)?, g_new.sub(&g_look)?)?;
        if !self.hessian.update(pair)? {
            self.counters.curvature_skips += 1;
        }
        Ok(())
    }
}

impl Optimizer for Naq {
    fn name(&self) -> &'static str {
        match (self.sampling, self.config.memory) {
            (Sampling::FullBatch, Memory::Full) => "naq",
            (Sampling::FullBatch, Memory::Limited(_)) => "lnaq",
            (Sampling::Online, Memory::Full) => "onaq",
            (Sampling::Online, Memory::Limited(_)) => "olnaq",
        }
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
        let iterations = match self.sampling {
            Sampling::FullBatch => {
                self.step(objective, None, epoch, 0)?;
                observe(&self.x);
                1
            }
            Sampling::Online => {
                let n = batches.iterations_per_epoch();
                for t in 0..n {
                    let batch = batches.next_batch();
                    self.step(objective, Some(&batch), epoch, t)?;
                    observe(&self.x);
                }
                n
            }
        };
        self.epoch = epoch;
        Ok(EpochReport {
            epoch,
            kind: EpochKind::Regular,
            iterations,
            counters: self.counters,
        })
    }
}
