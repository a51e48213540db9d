//! SVRG accelerated with a quasi-Newton metric updated once per epoch
//! ("SVRG+II").
//!
//! The pair is `s = w_{k+1} − w_k`, `y = Ω_{k+1} − Ω_k`, where `Ω_k` is the
//! full gradient kept from the previous epoch. Inner steps are
//! `x_{t+1} = x_t − α_t H f_t` with the SVRG estimator `f_t`.

use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::objective::Objective;

use super::svrg::{svrg_pass, svrg_reduced_gradient};
use super::{
    ensure_finite, BatchSampler, Counters, CurvaturePair, EpochKind, EpochReport, InverseHessian, Memory,
    Optimizer, StepSchedule, DEFAULT_SVRG_ALPHA,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvrgIIConfig {
    pub schedule: StepSchedule,
    pub memory: Memory,
    pub bootstrap_alpha: f64,
    /// Never update the metric, so every direction is `-f_t`.
    pub identity_hessian: bool,
}

impl SvrgIIConfig {
    pub fn new(alpha0: f64, memory: Memory) -> Result<Self> {
        Ok(SvrgIIConfig {
            schedule: StepSchedule::inverse_sqrt(alpha0)?,
            memory,
            bootstrap_alpha: DEFAULT_SVRG_ALPHA,
            identity_hessian: false,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SvrgII {
    config: SvrgIIConfig,
    w_prev: Vector,
    w_snap: Vector,
    /// `Ω_k`, the full gradient at `w_prev`.
    prev_full_grad: Option<Vector>,
    hessian: InverseHessian,
    last_pair: Option<CurvaturePair>,
    epoch: usize,
    counters: Counters,
}

impl SvrgII {
    pub fn new(w0: Vector, config: SvrgIIConfig) -> Result<Self> {
        let d = w0.len();
        Ok(SvrgII {
            config,
            w_prev: w0.clone(),
            w_snap: w0,
            prev_full_grad: None,
            hessian: InverseHessian::new(config.memory, d)?,
            last_pair: None,
            epoch: 0,
            counters: Counters::default(),
        })
    }

    pub fn hessian(&self) -> &InverseHessian {
        &self.hessian
    }

    /// `(s, y)` formed at the start of the last regular epoch.
    pub fn last_pair(&self) -> Option<&CurvaturePair> {
        self.last_pair.as_ref()
    }

    /// Full gradient retained for the next pair.
    pub fn stored_full_gradient(&self) -> Option<&Vector> {
        self.prev_full_grad.as_ref()
    }
}

impl Optimizer for SvrgII {
    fn name(&self) -> &'static str {
        "svrg2"
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
        let epoch = self.epoch + 1;

        let Some(prev_full_grad) = self.prev_full_grad.take() else {
            let pass = svrg_pass(
                objective,
                &self.w_snap,
                self.config.bootstrap_alpha,
                batches,
                &mut self.counters,
                epoch,
                observe,
            )?;
            self.prev_full_grad = Some(pass.full_grad);
            self.w_prev = std::mem::replace(&mut self.w_snap, pass.end);
            self.epoch = epoch;
            return Ok(EpochReport {
                epoch,
                kind: EpochKind::Bootstrap,
                iterations: pass.iterations,
                counters: self.counters,
            });
        };

        let full_grad = objective.full_gradient(&self.w_snap)?;
        self.counters.full_grad_evals += 1;
        ensure_finite(&full_grad, epoch, 0, "full gradient")?;

        if !self.config.identity_hessian {
            let pair = CurvaturePair::new(self.w_snap.sub(&self.w_prev)?, full_grad.sub(&prev_full_grad)?)?;
            self.last_pair = Some(pair.clone());
            if !self.hessian.update(pair)? {
                self.counters.curvature_skips += 1;
            }
        }

        let n = batches.iterations_per_epoch();
        let mut x = self.w_snap.clone();
        for t in 0..n {
            let batch = batches.next_batch();
            let g_x = objective.batch_gradient(&x, &batch)?;
            let g_snap = objective.batch_gradient(&self.w_snap, &batch)?;
            self.counters.minibatch_grad_evals += 2;
            let f = svrg_reduced_gradient(&g_x, &g_snap, &full_grad)?;
            ensure_finite(&f, epoch, t, "variance-reduced gradient")?;
            let direction = if self.config.identity_hessian {
                f.neg()
            } else {
                self.hessian.direction(&f)?
            };
            x.axpy(self.config.schedule.at_index(t), &direction)?;
            ensure_finite(&x, epoch, t, "iterate")?;
            observe(&x);
        }

        self.prev_full_grad = Some(full_grad);
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::testing::SeparableQuadratic;
    use crate::optim::Svrg;

    #[test]
    fn stored_pair_matches_recomputed_gradients() {
        let obj = SeparableQuadratic::random(6, 5, 40, 4.0);
        let cfg = SvrgIIConfig::new(0.5, Memory::Full).unwrap();
        let mut opt = SvrgII::new(Vector::from(vec![0.8; 5]), cfg).unwrap();
        let mut batches = BatchSampler::new(4, 40, 8).unwrap();
        let mut snapshots = vec![opt.params().clone()];
        for _ in 0..3 {
            opt.run_epoch(&obj, &mut batches).unwrap();
            snapshots.push(opt.params().clone());
        }
        // The last regular epoch started from snapshots[2] with w_prev = snapshots[1].
        let pair = opt.last_pair().unwrap();
        let y = obj
            .full_gradient(&snapshots[2])
            .unwrap()
            .sub(&obj.full_gradient(&snapshots[1]).unwrap())
            .unwrap();
        assert!(pair.q().sub(&y).unwrap().norm_inf() < 1e-12);
        assert_eq!(pair.p(), &snapshots[2].sub(&snapshots[1]).unwrap());
    }

    #[test]
    fn identity_metric_reproduces_svrg() {
        let obj = SeparableQuadratic::random(7, 6, 50, 4.0);
        let w0 = Vector::from(vec![-0.7; 6]);
        let alpha = 0.05;
        let cfg = SvrgIIConfig {
            schedule: StepSchedule::constant(alpha).unwrap(),
            memory: Memory::Full,
            bootstrap_alpha: alpha,
            identity_hessian: true,
        };
        let mut a = SvrgII::new(w0.clone(), cfg).unwrap();
        let mut b = Svrg::new(w0, alpha).unwrap();
        let mut ba = BatchSampler::new(3, 50, 5).unwrap();
        let mut bb = BatchSampler::new(3, 50, 5).unwrap();
        for _ in 0..4 {
            let mut ta = Vec::new();
            let mut tb = Vec::new();
            a.run_epoch_observed(&obj, &mut ba, &mut |x| ta.push(x.clone())).unwrap();
            b.run_epoch_observed(&obj, &mut bb, &mut |x| tb.push(x.clone())).unwrap();
            assert_eq!(ta, tb);
        }
    }

    #[test]
    fn beats_svrg_on_least_squares() {
        use crate::data::SyntheticQuadratic;
        use crate::model::NetworkObjective;
        let q = SyntheticQuadratic::new(9, 50.0, 2);
        let (ds, _) = q.generate().unwrap();
        let spec = q.network();
        let obj = NetworkObjective::new(&spec, &ds).unwrap();
        let w0 = Vector::zeros(10);
        let mut two = SvrgII::new(w0.clone(), SvrgIIConfig::new(1.0, Memory::Full).unwrap()).unwrap();
        let mut one = Svrg::new(w0, DEFAULT_SVRG_ALPHA).unwrap();
        let mut b1 = BatchSampler::new(5, ds.rows(), 8).unwrap();
        let mut b2 = BatchSampler::new(5, ds.rows(), 8).unwrap();
        for _ in 0..10 {
            two.run_epoch(&obj, &mut b1).unwrap();
            one.run_epoch(&obj, &mut b2).unwrap();
        }
        let l2 = obj.full_loss(two.params()).unwrap();
        let l1 = obj.full_loss(one.params()).unwrap();
        assert!(l2 < l1, "svrg2 {l2} svrg {l1}");
    }
}
