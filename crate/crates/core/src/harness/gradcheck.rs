//! Backpropagation against finite differences.

use crate::error::{Error, Result};
use crate::model::{self, Batch};
use crate::numerics::Vector;
use crate::optim::BatchSampler;

use super::config::RunConfig;
use super::run::Prepared;

/// Finite-difference step, relative to `max(1, |w_i|)`.
pub const FD_STEP: f64 = 1e-3;

/// Denominator floor of the relative error, so coordinates whose gradient
/// is numerically zero are judged on absolute error instead.
pub const REL_ERR_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckReport {
    pub max_rel_err: f64,
    pub worst_coordinate: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub coordinates: usize,
    pub batch: usize,
    pub tolerance: f64,
}

impl GradcheckReport {
    /// Strict comparison, so a zero tolerance never passes.
    pub fn passed(&self) -> bool {
        self.max_rel_err < self.tolerance
    }
}

/// `|a − n| / max(|a|, |n|, floor)`
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_ERR_FLOOR)
}

/// Fourth-order central difference of `f` along coordinate `i`.
pub fn central_difference(f: &dyn Fn(&Vector) -> Result<f64>, w: &Vector, i: usize) -> Result<f64> {
    let h = FD_STEP * w[i].abs().max(1.0);
    let at = |delta: f64| -> Result<f64> {
        let mut p = w.clone();
        p[i] += delta;
        f(&p)
    };
    Ok((at(-2.0 * h)? - 8.0 * at(-h)? + 8.0 * at(h)? - at(2.0 * h)?) / (12.0 * h))
}

/// Compares backpropagation with finite differences on every coordinate at
/// the run's initial weights and its first training mini-batch.
pub fn gradcheck(config: &RunConfig, tolerance: f64) -> Result<GradcheckReport> {
    if !(tolerance >= 0.0) {
        return Err(Error::Argument(format!("tolerance must be non-negative, got {tolerance}")));
    }
    let prepared = Prepared::new(config)?;
    let rows = BatchSampler::new(config.seed, prepared.train.rows(), config.batch)?.next_batch();
    let batch = Batch::from_dataset(&prepared.train, &rows)?;
    let spec = &prepared.spec;
    let w = &prepared.w0;
    let g = model::gradient(spec, w, &batch)?;
    let f = |p: &Vector| model::loss(spec, p, &batch);
    let mut report = GradcheckReport {
        max_rel_err: 0.0,
        worst_coordinate: 0,
        analytic: g[0],
        numeric: f64::NAN,
        coordinates: w.len(),
        batch: rows.len(),
        tolerance,
    };
    for i in 0..w.len() {
        let numeric = central_difference(&f, w, i)?;
        let err = relative_error(g[i], numeric);
        if i == 0 || err > report.max_rel_err || err.is_nan() {
            report.max_rel_err = err;
            report.worst_coordinate = i;
            report.analytic = g[i];
            report.numeric = numeric;
        }
    }
    Ok(report)
}

/// Human-readable name of parameter `i` under the layer-by-layer packing
/// (weights row-major, then biases).
pub fn describe_coordinate(layers: &[usize], mut i: usize) -> String {
    for (l, pair) in layers.windows(2).enumerate() {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        if i < fan_in * fan_out {
            return format!("layer {} weight [{}, {}]", l + 1, i / fan_in, i % fan_in);
        }
        i -= fan_in * fan_out;
        if i < fan_out {
            return format!("layer {} bias [{i}]", l + 1);
        }
        i -= fan_out;
    }
    format!("out of range (+{i})")
}
