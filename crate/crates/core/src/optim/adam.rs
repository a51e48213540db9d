use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::objective::Objective;

use super::{ensure_finite, BatchSampler, Counters, EpochKind, EpochReport, Optimizer};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            alpha: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Adam with bias-corrected moment estimates.
#[derive(Debug, Clone)]
pub struct Adam {
    config: AdamConfig,
    x: Vector,
    m: Vector,
    v: Vector,
    steps: u64,
    epoch: usize,
    counters: Counters,
}

impl Adam {
    pub fn new(w0: Vector, config: AdamConfig) -> Result<Self> {
        let AdamConfig { alpha, beta1, beta2, eps } = config;
        if !(alpha >= 0.0 && (0.0..1.0).contains(&beta1) && (0.0..1.0).contains(&beta2) && eps > 0.0) {
            return Err(Error::Argument(format!("invalid Adam hyper-parameters {config:?}")));
        }
        let d = w0.len();
        Ok(Adam {
            config,
            x: w0,
            m: Vector::zeros(d),
            v: Vector::zeros(d),
            steps: 0,
            epoch: 0,
            counters: Counters::default(),
        })
    }

    fn apply(&mut self, g: &Vector) {
        let AdamConfig { alpha, beta1, beta2, eps } = self.config;
        self.steps += 1;
        let c1 = 1.0 - beta1.powf(self.steps as f64);
        let c2 = 1.0 - beta2.powf(self.steps as f64);
        let x = self.x.as_mut_slice();
        let m = self.m.as_mut_slice();
        let v = self.v.as_mut_slice();
        for i in 0..x.len() {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            x[i] -= alpha * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

impl Optimizer for Adam {
    fn name(&self) -> &'static str {
        "adam"
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
            self.apply(&g);
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::testing::SeparableQuadratic;

    #[test]
    fn zero_gradient_keeps_parameters() {
        let mut adam = Adam::new(Vector::from(vec![0.3, -0.4]), AdamConfig::default()).unwrap();
        for _ in 0..10 {
            adam.apply(&Vector::zeros(2));
        }
        assert_eq!(adam.params().as_slice(), &[0.3, -0.4]);
    }

    #[test]
    fn first_step_has_magnitude_alpha() {
        let cfg = AdamConfig::default();
        let mut adam = Adam::new(Vector::zeros(1), cfg).unwrap();
        adam.apply(&Vector::from(vec![3.7]));
        let moved = adam.params()[0].abs();
        assert!((moved - cfg.alpha).abs() < 1e-10, "{moved}");
    }

    #[test]
    fn reaches_optimum_of_convex_quadratic() {
        let obj = SeparableQuadratic::random(11, 4, 64, 3.0);
        // Minimizer of a separable quadratic: weighted mean of the centres.
        let opt: Vector = (0..4)
            .map(|j| {
                let num: f64 = (0..64).map(|i| obj.a[i][j] * obj.c[i][j]).sum();
                let den: f64 = (0..64).map(|i| obj.a[i][j]).sum();
                num / den
            })
            .collect();
        let best = obj.full_loss(&opt).unwrap();
        let mut adam = Adam::new(Vector::from(vec![0.5; 4]), AdamConfig::default()).unwrap();
        let mut batches = BatchSampler::new(1, 64, 1).unwrap();
        for _ in 0..50 {
            adam.run_epoch(&obj, &mut batches).unwrap();
        }
        let gap = obj.full_loss(adam.params()).unwrap() - best;
        assert!(gap < 1e-3, "gap {gap}");
    }
}
