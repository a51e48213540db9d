use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    /// `alpha0 / sqrt(t)`
    InverseSqrt,
    /// `alpha0` at every step.
    Constant,
}

/// Step size as a function of the 1-based inner-iteration counter, which
/// restarts every epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    alpha0: f64,
    rule: StepRule,
}

impl StepSchedule {
    pub fn inverse_sqrt(alpha0: f64) -> Result<Self> {
        Self::new(alpha0, StepRule::InverseSqrt)
    }

    pub fn constant(alpha: f64) -> Result<Self> {
        Self::new(alpha, StepRule::Constant)
    }

    pub fn new(alpha0: f64, rule: StepRule) -> Result<Self> {
        if !(alpha0.is_finite() && alpha0 >= 0.0) {
            return Err(Error::Argument(format!("step size must be finite and >= 0, got {alpha0}")));
        }
        Ok(StepSchedule { alpha0, rule })
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn rule(&self) -> StepRule {
        self.rule
    }

    pub fn step_size(&self, t: usize) -> Result<f64> {
        if t == 0 {
            return Err(Error::Argument("step counter starts at 1".into()));
        }
        Ok(self.at(t))
    }

    /// Unchecked version for loop index `t` (0-based), i.e. counter `t + 1`.
    pub(crate) fn at_index(&self, t: usize) -> f64 {
        self.at(t + 1)
    }

    fn at(&self, t: usize) -> f64 {
        match self.rule {
            StepRule::InverseSqrt => self.alpha0 / (t as f64).sqrt(),
            StepRule::Constant => self.alpha0,
        }
    }
}
