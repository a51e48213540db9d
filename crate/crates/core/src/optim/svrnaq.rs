//! Stochastic variance-reduced Nesterov-accelerated quasi-Newton (SVR-NAQ)
//! and its limited-memory form (SVR-LNAQ).
//!
//! After a single SVRG bootstrap epoch, every epoch `k`:
//!
//! 1. computes the full gradient `Ω` at the snapshot `w_{k+1}`;
//! 2. builds one curvature pair from the epoch-level look-ahead
//!    `u = w_k + μ V_k`: `p = w_{k+1} − u`, `q = Ω − ∇E(u)` (full batch);
//! 3. updates the inverse Hessian (dense) or pushes the pair (limited);
//! 4. runs `n` inner steps with the Hessian held fixed:
//!    `f_t = ∇E_B(x_t + μ v_t) − ∇E_B(w_{k+1}) + Ω`,
//!    `v_{t+1} = μ v_t − α_t H f_t`, `x_{t+1} = x_t + v_{t+1}`;
//! 5. carries `V_{k+1} = v_n` and `w_{k+2} = x_n` into the next epoch.
//!
//! Each regular epoch costs exactly two full gradients and `2n` mini-batch
//! gradients.

use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::objective::Objective;

use super::svrg::{svrg_pass, svrg_reduced_gradient};
use super::{
    check_momentum, ensure_finite, BatchSampler, Counters, CurvaturePair, EpochKind, EpochReport,
    InverseHessian, Memory, Optimizer, StepSchedule, DEFAULT_SVRG_ALPHA,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvrNaqConfig {
    pub mu: f64,
    pub schedule: StepSchedule,
    pub memory: Memory,
    /// Step of the SVRG bootstrap epoch.
    pub bootstrap_alpha: f64,
}

impl SvrNaqConfig {
    pub fn new(mu: f64, alpha0: f64, memory: Memory) -> Result<Self> {
        Ok(SvrNaqConfig {
            mu,
            schedule: StepSchedule::inverse_sqrt(alpha0)?,
            memory,
            bootstrap_alpha: DEFAULT_SVRG_ALPHA,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SvrNaq {
    config: SvrNaqConfig,
    /// `w_k`
    w_prev: Vector,
    /// `w_{k+1}`, the snapshot of the next epoch.
    w_snap: Vector,
    /// `V_k`
    velocity: Vector,
    hessian: InverseHessian,
    last_pair: Option<CurvaturePair>,
    epoch: usize,
    bootstrap_done: bool,
    counters: Counters,
}

impl SvrNaq {
    pub fn new(w0: Vector, config: SvrNaqConfig) -> Result<Self> {
        check_momentum(config.mu)?;
        if !(config.bootstrap_alpha.is_finite() && config.bootstrap_alpha >= 0.0) {
            return Err(Error::Argument("invalid bootstrap step".into()));
        }
        let d = w0.len();
        Ok(SvrNaq {
            config,
            w_prev: w0.clone(),
            velocity: Vector::zeros(d),
            hessian: InverseHessian::new(config.memory, d)?,
            w_snap: w0,
            last_pair: None,
            epoch: 0,
            bootstrap_done: false,
            counters: Counters::default(),
        })
    }

    pub fn config(&self) -> &SvrNaqConfig {
        &self.config
    }

    pub fn hessian(&self) -> &InverseHessian {
        &self.hessian
    }

    pub fn velocity(&self) -> &Vector {
        &self.velocity
    }

    pub fn previous_snapshot(&self) -> &Vector {
        &self.w_prev
    }

    pub fn bootstrap_done(&self) -> bool {
        self.bootstrap_done
    }

    /// Pair formed at the start of the last regular epoch, accepted or not.
    pub fn last_pair(&self) -> Option<&CurvaturePair> {
        self.last_pair.as_ref()
    }

    fn bootstrap(
        &mut self,
        objective: &dyn Objective,
        batches: &mut BatchSampler,
        observe: &mut dyn FnMut(&Vector),
    ) -> Result<EpochReport> {
        let epoch = self.epoch + 1;
        let pass = svrg_pass(
            objective,
            &self.w_snap,
            self.config.bootstrap_alpha,
            batches,
            &mut self.counters,
            epoch,
            observe,
        )?;
        self.w_prev = std::mem::replace(&mut self.w_snap, pass.end);
        self.velocity = Vector::zeros(self.w_snap.len());
        self.bootstrap_done = true;
        self.epoch = epoch;
        Ok(EpochReport {
            epoch,
            kind: EpochKind::Bootstrap,
            iterations: pass.iterations,
            counters: self.counters,
        })
    }

    fn regular_epoch(
        &mut self,
        objective: &dyn Objective,
        batches: &mut BatchSampler,
        observe: &mut dyn FnMut(&Vector),
    ) -> Result<EpochReport> {
        let epoch = self.epoch + 1;
        let mu = self.config.mu;

        let full_grad = objective.full_gradient(&self.w_snap)?;
        ensure_finite(&full_grad, epoch, 0, "full gradient")?;

        let mut lookahead = self.w_prev.clone();
        lookahead.axpy(mu, &self.velocity)?;
        let lookahead_grad = objective.full_gradient(&lookahead)?;
        self.counters.full_grad_evals += 2;
        ensure_finite(&lookahead_grad, epoch, 0, "look-ahead gradient")?;

        let pair = CurvaturePair::new(self.w_snap.sub(&lookahead)?, full_grad.sub(&lookahead_grad)?)?;
        self.last_pair = Some(pair.clone());
        if !self.hessian.update(pair)? {
            self.counters.curvature_skips += 1;
        }

        let n = batches.iterations_per_epoch();
        let mut x = self.w_snap.clone();
        let mut v = self.velocity.clone();
        for t in 0..n {
            let batch = batches.next_batch();
            let mut probe = x.clone();
            probe.axpy(mu, &v)?;
            let g_probe = objective.batch_gradient(&probe, &batch)?;
            let g_snap = objective.batch_gradient(&self.w_snap, &batch)?;
            self.counters.minibatch_grad_evals += 2;
            let f = svrg_reduced_gradient(&g_probe, &g_snap, &full_grad)?;
            ensure_finite(&f, epoch, t, "variance-reduced gradient")?;
            let direction = self.hessian.direction(&f)?;
            v.scale(mu);
            v.axpy(self.config.schedule.at_index(t), &direction)?;
            x.axpy(1.0, &v)?;
            ensure_finite(&x, epoch, t, "iterate")?;
            observe(&x);
        }

        self.velocity = v;
        self.w_prev = std::mem::replace(&mut self.w_snap, x);
        self.epoch = epoch;
        Ok(EpochReport {
            epoch,
            kind: EpochKind::Regular,
            iterations: n,
            counters: self.counters,
        })
    }
}

impl Optimizer for SvrNaq {
    fn name(&self) -> &'static str {
        match self.config.memory {
            Memory::Full => "svrnaq",
            Memory::Limited(_) => "svrlnaq",
        }
    }

    fn params(&self) -> &Vector {
        &self.w_snap
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
        Error::check_len(objective.dim(), self.w_snap.len())?;
        if self.bootstrap_done {
            self.regular_epoch(objective, batches, observe)
        } else {
            self.bootstrap(objective, batches, observe)
        }
    }
}
