use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => libm::tanh(z),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    #[inline]
    pub fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Identity => 1.0,
        }
    }
}

/// Fully connected layer `z = f(x · W + b)` with `W` stored `in × out`
/// row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
    n_in: usize,
    n_out: usize,
}

impl DenseLayer {
    pub fn new(n_in: usize, n_out: usize, weights: Vec<f64>, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if weights.len() != n_in * n_out {
            return Err(Error::DimensionMismatch {
                expected: n_in * n_out,
                found: weights.len(),
            });
        }
        if bias.len() != n_out {
            return Err(Error::DimensionMismatch {
                expected: n_out,
                found: bias.len(),
            });
        }
        Ok(Self {
            weights,
            bias,
            activation,
            n_in,
            n_out,
        })
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }
}

pub fn forward_dense(layer: &DenseLayer, input: &[f64]) -> Result<Vec<f64>> {
    if input.len() != layer.n_in {
        return Err(Error::DimensionMismatch {
            expected: layer.n_in,
            found: input.len(),
        });
    }
    Ok((0..layer.n_out)
        .map(|j| {
            let z = input
                .iter()
                .enumerate()
                .fold(layer.bias[j], |acc, (i, x)| acc + x * layer.weights[i * layer.n_out + j]);
            layer.activation.apply(z)
        })
        .collect())
}
