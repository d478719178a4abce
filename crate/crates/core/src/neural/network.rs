use alloc::vec::Vec;
use core::ops::Range;

use rand::Rng;

use crate::rng::ModelRng;

/// A named slice of a network's flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamBlock {
    pub name: &'static str,
    pub range: Range<usize>,
}

/// Common surface of the three regressors: a flat parameter vector, a
/// batched forward pass and the gradient of the mean squared error.
///
/// Inputs are flat, `batch × input_len()` values; for the recurrent nets each
/// sample is `ndays` consecutive feature rows, oldest first.
pub trait Network {
    fn input_len(&self) -> usize;
    fn params(&self) -> &[f64];
    fn params_mut(&mut self) -> &mut [f64];
    fn blocks(&self) -> Vec<ParamBlock>;
    fn forward(&self, inputs: &[f64], batch: usize) -> Vec<f64>;
    /// `(mean((ŷ − y)²), ∂loss/∂params)` over one batch.
    fn loss_and_grad(&self, inputs: &[f64], targets: &[f64]) -> (f64, Vec<f64>);

    fn loss(&self, inputs: &[f64], targets: &[f64]) -> f64 {
        let out = self.forward(inputs, targets.len());
        mean_squared_error(&out, targets)
    }
}

pub(crate) fn mean_squared_error(out: &[f64], targets: &[f64]) -> f64 {
    out.iter()
        .zip(targets)
        .map(|(o, t)| (o - t) * (o - t))
        .sum::<f64>()
        / targets.len() as f64
}

/// `∂ mean((ŷ − y)²) / ∂ŷ`.
pub(crate) fn output_delta(out: &[f64], targets: &[f64]) -> Vec<f64> {
    let scale = 2.0 / targets.len() as f64;
    out.iter().zip(targets).map(|(o, t)| scale * (o - t)).collect()
}

/// Uniform Glorot initialisation of `values` for a block with the given fans.
pub(crate) fn glorot_fill(values: &mut [f64], fan_in: usize, fan_out: usize, rng: &mut ModelRng) {
    let bound = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
    for v in values {
        *v = rng.random_range(-bound..bound);
    }
}

/// Rescales `grads` so their L2 norm is at most `max_norm`. Returns the norm
/// before clipping.
pub fn clip_global_norm(grads: &mut [f64], max_norm: f64) -> f64 {
    let norm = libm::sqrt(grads.iter().map(|g| g * g).sum::<f64>());
    if norm > max_norm && norm.is_finite() {
        let scale = max_norm / norm;
        grads.iter_mut().for_each(|g| *g *= scale);
    }
    norm
}

/// Copies timestep `t` of every sample into a `batch × n_in` buffer.
pub(crate) fn gather_step(inputs: &[f64], batch: usize, ndays: usize, n_in: usize, t: usize, out: &mut [f64]) {
    let sample_len = ndays * n_in;
    for s in 0..batch {
        let src = s * sample_len + t * n_in;
        out[s * n_in..(s + 1) * n_in].copy_from_slice(&inputs[src..src + n_in]);
    }
}

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-z))
}
