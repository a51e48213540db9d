//! Fully connected feed-forward network with hand-written backpropagation.
//!
//! Parameters live in one flat vector, packed layer by layer: for a layer
//! with `fan_in` inputs and `fan_out` neurons, the `fan_out × fan_in` weight
//! matrix (row-major, one row per neuron) comes first, then the `fan_out`
//! biases. Hidden layers use the logistic sigmoid; the output layer is either
//! linear (paired with half squared error) or softmax (paired with
//! cross-entropy).
//!
//! Batch sums run in batch order, so results are bit-reproducible for a given
//! batch.

use std::fmt;
use std::str::FromStr;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::objective::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HiddenActivation {
    Sigmoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    Linear,
    Softmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Mse,
    CrossEntropy,
}

impl FromStr for OutputActivation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(OutputActivation::Linear),
            "softmax" => Ok(OutputActivation::Softmax),
            other => Err(Error::Config(format!("unknown output activation `{other}`"))),
        }
    }
}

impl fmt::Display for OutputActivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputActivation::Linear => "linear",
            OutputActivation::Softmax => "softmax",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSpec {
    layer_sizes: Vec<usize>,
    hidden: HiddenActivation,
    output: OutputActivation,
    loss: LossKind,
}

impl NetworkSpec {
    pub fn new(
        layer_sizes: Vec<usize>,
        hidden: HiddenActivation,
        output: OutputActivation,
        loss: LossKind,
    ) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::Argument(
                "a network needs at least an input and an output layer".into(),
            ));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::Argument("layer sizes must be at least 1".into()));
        }
        match (output, loss) {
            (OutputActivation::Linear, LossKind::Mse)
            | (OutputActivation::Softmax, LossKind::CrossEntropy) => {}
            _ => {
                return Err(Error::Argument(
                    "linear output pairs with mse, softmax with cross-entropy".into(),
                ))
            }
        }
        Ok(NetworkSpec {
            layer_sizes,
            hidden,
            output,
            loss,
        })
    }

    /// Sigmoid hidden layers, linear output, squared error.
    pub fn regression(layer_sizes: Vec<usize>) -> Result<Self> {
        Self::new(
            layer_sizes,
            HiddenActivation::Sigmoid,
            OutputActivation::Linear,
            LossKind::Mse,
        )
    }

    /// Sigmoid hidden layers, softmax output, cross-entropy.
    pub fn classification(layer_sizes: Vec<usize>) -> Result<Self> {
        Self::new(
            layer_sizes,
            HiddenActivation::Sigmoid,
            OutputActivation::Softmax,
            LossKind::CrossEntropy,
        )
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output
    }

    pub fn loss_kind(&self) -> LossKind {
        self.loss
    }

    pub fn is_classifier(&self) -> bool {
        self.loss == LossKind::CrossEntropy
    }

    pub fn param_count(&self) -> usize {
        param_count(self)
    }

    fn layers(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.layer_sizes.windows(2).map(|w| (w[0], w[1]))
    }
}

/// `Σ (fan_in + 1) · fan_out` over layers.
pub fn param_count(spec: &NetworkSpec) -> usize {
    spec.layers().map(|(i, o)| (i + 1) * o).sum()
}

/// Rows of inputs and targets, borrowed from a dataset.
#[derive(Debug, Clone)]
pub struct Batch<'a> {
    inputs: Vec<&'a [f64]>,
    targets: Vec<&'a [f64]>,
}

impl<'a> Batch<'a> {
    pub fn new(inputs: Vec<&'a [f64]>, targets: Vec<&'a [f64]>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::Argument("batch must contain at least one row".into()));
        }
        Error::check_len(inputs.len(), targets.len())?;
        Ok(Batch { inputs, targets })
    }

    pub fn from_dataset(data: &'a Dataset, indices: &[usize]) -> Result<Self> {
        let mut inputs = Vec::with_capacity(indices.len());
        let mut targets = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= data.rows() {
                return Err(Error::Argument(format!(
                    "row index {i} out of range for {} rows",
                    data.rows()
                )));
            }
            inputs.push(data.features(i));
            targets.push(data.targets(i));
        }
        Self::new(inputs, targets)
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    fn check(&self, spec: &NetworkSpec) -> Result<()> {
        for (x, t) in self.inputs.iter().zip(&self.targets) {
            Error::check_len(spec.input_size(), x.len())?;
            Error::check_len(spec.output_size(), t.len())?;
        }
        Ok(())
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Per-layer activations of one sample; `acts[0]` is the input.
struct Trace {
    acts: Vec<Vec<f64>>,
}

fn forward(spec: &NetworkSpec, w: &[f64], input: &[f64]) -> Trace {
    let n_layers = spec.layer_sizes.len() - 1;
    let mut acts = Vec::with_capacity(n_layers + 1);
    acts.push(input.to_vec());
    let mut offset = 0;
    for (l, (fan_in, fan_out)) in spec.layers().enumerate() {
        let weights = &w[offset..offset + fan_in * fan_out];
        let biases = &w[offset + fan_in * fan_out..offset + (fan_in + 1) * fan_out];
        offset += (fan_in + 1) * fan_out;
        let prev = &acts[l];
        let mut z: Vec<f64> = (0..fan_out)
            .map(|o| {
                let row = &weights[o * fan_in..(o + 1) * fan_in];
                row.iter().zip(prev).map(|(a, b)| a * b).sum::<f64>() + biases[o]
            })
            .collect();
        if l + 1 < n_layers {
            match spec.hidden {
                HiddenActivation::Sigmoid => z.iter_mut().for_each(|v| *v = sigmoid(*v)),
            }
        } else if spec.output == OutputActivation::Softmax {
            softmax_in_place(&mut z);
        }
        acts.push(z);
    }
    Trace { acts }
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in z.iter_mut() {
        *v /= total;
    }
}

fn sample_loss(spec: &NetworkSpec, out: &[f64], target: &[f64]) -> f64 {
    match spec.loss {
        LossKind::Mse => 0.5 * out.iter().zip(target).map(|(y, t)| (y - t) * (y - t)).sum::<f64>(),
        LossKind::CrossEntropy => -out
            .iter()
            .zip(target)
            .filter(|(_, &t)| t != 0.0)
            .map(|(y, t)| t * y.max(f64::MIN_POSITIVE).ln())
            .sum::<f64>(),
    }
}

/// Network output for one input row.
pub fn predict(spec: &NetworkSpec, w: &Vector, input: &[f64]) -> Result<Vec<f64>> {
    Error::check_len(param_count(spec), w.len())?;
    Error::check_len(spec.input_size(), input.len())?;
    Ok(forward(spec, w.as_slice(), input).acts.pop().unwrap())
}

/// Mean per-sample loss over the batch.
pub fn loss(spec: &NetworkSpec, w: &Vector, batch: &Batch<'_>) -> Result<f64> {
    Error::check_len(param_count(spec), w.len())?;
    batch.check(spec)?;
    let mut total = 0.0;
    for (x, t) in batch.inputs.iter().zip(&batch.targets) {
        let trace = forward(spec, w.as_slice(), x);
        total += sample_loss(spec, trace.acts.last().unwrap(), t);
    }
    Ok(total / batch.len() as f64)
}

/// Gradient of [`loss`] by backpropagation.
pub fn gradient(spec: &NetworkSpec, w: &Vector, batch: &Batch<'_>) -> Result<Vector> {
    Ok(loss_and_gradient(spec, w, batch)?.1)
}

pub fn loss_and_gradient(spec: &NetworkSpec, w: &Vector, batch: &Batch<'_>) -> Result<(f64, Vector)> {
    Error::check_len(param_count(spec), w.len())?;
    batch.check(spec)?;
    let ws = w.as_slice();
    let mut grad = vec![0.0; ws.len()];
    let layers: Vec<(usize, usize)> = spec.layers().collect();
    let offsets: Vec<usize> = layers
        .iter()
        .scan(0, |acc, &(i, o)| {
            let start = *acc;
            *acc += (i + 1) * o;
            Some(start)
        })
        .collect();

    let mut total = 0.0;
    for (x, t) in batch.inputs.iter().zip(&batch.targets) {
        let trace = forward(spec, ws, x);
        let out = trace.acts.last().unwrap();
        total += sample_loss(spec, out, t);
        // Both output pairings give dLoss/dz = output - target.
        let mut delta: Vec<f64> = out.iter().zip(t.iter()).map(|(y, t)| y - t).collect();
        for l in (0..layers.len()).rev() {
            let (fan_in, fan_out) = layers[l];
            let off = offsets[l];
            let prev = &trace.acts[l];
            for o in 0..fan_out {
                let d = delta[o];
                let row = &mut grad[off + o * fan_in..off + (o + 1) * fan_in];
                for (g, a) in row.iter_mut().zip(prev) {
                    *g += d * a;
                }
                grad[off + fan_in * fan_out + o] += d;
            }
            if l > 0 {
                let weights = &ws[off..off + fan_in * fan_out];
                delta = (0..fan_in)
                    .map(|i| {
                        let back: f64 = (0..fan_out).map(|o| weights[o * fan_in + i] * delta[o]).sum();
                        let a = prev[i];
                        back * a * (1.0 - a)
                    })
                    .collect();
            }
        }
    }
    let inv_b = 1.0 / batch.len() as f64;
    grad.iter_mut().for_each(|g| *g *= inv_b);
    Ok((total * inv_b, Vector::from(grad)))
}

/// Fraction of rows whose arg-max output matches the arg-max target.
pub fn accuracy(spec: &NetworkSpec, w: &Vector, batch: &Batch<'_>) -> Result<f64> {
    if !spec.is_classifier() {
        return Err(Error::Mode {
            expected: "classification",
        });
    }
    Error::check_len(param_count(spec), w.len())?;
    batch.check(spec)?;
    let correct = batch
        .inputs
        .iter()
        .zip(&batch.targets)
        .filter(|(x, t)| {
            let out = forward(spec, w.as_slice(), x).acts.pop().unwrap();
            argmax(&out) == argmax(t)
        })
        .count();
    Ok(correct as f64 / batch.len() as f64)
}

/// Root of the mean squared residual over every output of every row.
pub fn rmse(spec: &NetworkSpec, w: &Vector, batch: &Batch<'_>) -> Result<f64> {
    Error::check_len(param_count(spec), w.len())?;
    batch.check(spec)?;
    let mut sum = 0.0;
    for (x, t) in batch.inputs.iter().zip(&batch.targets) {
        let out = forward(spec, w.as_slice(), x).acts.pop().unwrap();
        sum += out.iter().zip(t.iter()).map(|(y, t)| (y - t) * (y - t)).sum::<f64>();
    }
    Ok((sum / (batch.len() * spec.output_size()) as f64).sqrt())
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &x)| if x > best.1 { (i, x) } else { best })
        .0
}

/// A network bound to a training set.
#[derive(Debug, Clone, Copy)]
pub struct NetworkObjective<'a> {
    pub spec: &'a NetworkSpec,
    pub data: &'a Dataset,
}

impl<'a> NetworkObjective<'a> {
    pub fn new(spec: &'a NetworkSpec, data: &'a Dataset) -> Result<Self> {
        Error::check_len(spec.input_size(), data.n_features())?;
        Error::check_len(spec.output_size(), data.n_outputs())?;
        Ok(NetworkObjective { spec, data })
    }
}

impl Objective for NetworkObjective<'_> {
    fn dim(&self) -> usize {
        param_count(self.spec)
    }

    fn n_samples(&self) -> usize {
        self.data.rows()
    }

    fn batch_loss(&self, w: &Vector, batch: &[usize]) -> Result<f64> {
        loss(self.spec, w, &Batch::from_dataset(self.data, batch)?)
    }

    fn batch_gradient(&self, w: &Vector, batch: &[usize]) -> Result<Vector> {
        gradient(self.spec, w, &Batch::from_dataset(self.data, batch)?)
    }
}
