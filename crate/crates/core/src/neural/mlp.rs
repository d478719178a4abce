use alloc::vec;
use alloc::vec::Vec;

use super::dense::{Activation, DenseLayer};
use super::network::{glorot_fill, mean_squared_error, output_delta, Network, ParamBlock};
use crate::error::{Error, Result};
use crate::matrix::gemm;
use crate::rng::ModelRng;

/// One hidden layer followed by a linear output unit.
///
/// Parameter layout: `W1 (in × hidden)`, `b1`, `w2 (hidden)`, `b2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    n_in: usize,
    hidden: usize,
    activation: Activation,
    params: Vec<f64>,
}

impl Mlp {
    pub fn new(n_in: usize, hidden: usize, activation: Activation, rng: &mut ModelRng) -> Self {
        let mut net = Self {
            n_in,
            hidden,
            activation,
            params: vec![0.0; n_in * hidden + 2 * hidden + 1],
        };
        let (w1, w2) = (net.w1_range(), net.w2_range());
        glorot_fill(&mut net.params[w1], n_in, hidden, rng);
        glorot_fill(&mut net.params[w2], hidden, 1, rng);
        net
    }

    pub fn from_layers(hidden_layer: &DenseLayer, output_layer: &DenseLayer) -> Result<Self> {
        if output_layer.n_out() != 1 || output_layer.activation != Activation::Identity {
            return Err(Error::InvalidParameter("output layer must be a single linear unit"));
        }
        if output_layer.n_in() != hidden_layer.n_out() {
            return Err(Error::DimensionMismatch {
                expected: hidden_layer.n_out(),
                found: output_layer.n_in(),
            });
        }
        let mut params = hidden_layer.weights.clone();
        params.extend_from_slice(&hidden_layer.bias);
        params.extend_from_slice(&output_layer.weights);
        params.extend_from_slice(&output_layer.bias);
        Ok(Self {
            n_in: hidden_layer.n_in(),
            hidden: hidden_layer.n_out(),
            activation: hidden_layer.activation,
            params,
        })
    }

    pub fn hidden_layer(&self) -> DenseLayer {
        DenseLayer::new(
            self.n_in,
            self.hidden,
            self.params[self.w1_range()].to_vec(),
            self.params[self.b1_range()].to_vec(),
            self.activation,
        )
        .expect("consistent layout")
    }

    pub fn output_layer(&self) -> DenseLayer {
        DenseLayer::new(
            self.hidden,
            1,
            self.params[self.w2_range()].to_vec(),
            self.params[self.b2_range()].to_vec(),
            Activation::Identity,
        )
        .expect("consistent layout")
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden
    }

    fn w1_range(&self) -> core::ops::Range<usize> {
        0..self.n_in * self.hidden
    }
    fn b1_range(&self) -> core::ops::Range<usize> {
        let s = self.n_in * self.hidden;
        s..s + self.hidden
    }
    fn w2_range(&self) -> core::ops::Range<usize> {
        let s = self.b1_range().end;
        s..s + self.hidden
    }
    fn b2_range(&self) -> core::ops::Range<usize> {
        let s = self.w2_range().end;
        s..s + 1
    }

    /// Returns `(pre-activations, activations, outputs)`.
    fn forward_cached(&self, inputs: &[f64], batch: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let h = self.hidden;
        let b1 = &self.params[self.b1_range()];
        let mut z = Vec::with_capacity(batch * h);
        for _ in 0..batch {
            z.extend_from_slice(b1);
        }
        gemm(batch, self.n_in, h, 1.0, inputs, false, &self.params[self.w1_range()], false, 1.0, &mut z);
        let a: Vec<f64> = z.iter().map(|&v| self.activation.apply(v)).collect();
        let mut out = vec![self.params[self.b2_range()][0]; batch];
        gemm(batch, h, 1, 1.0, &a, false, &self.params[self.w2_range()], false, 1.0, &mut out);
        (z, a, out)
    }
}

impl Network for Mlp {
    fn input_len(&self) -> usize {
        self.n_in
    }

    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn blocks(&self) -> Vec<ParamBlock> {
        vec![
            ParamBlock { name: "hidden.weights", range: self.w1_range() },
            ParamBlock { name: "hidden.bias", range: self.b1_range() },
            ParamBlock { name: "output.weights", range: self.w2_range() },
            ParamBlock { name: "output.bias", range: self.b2_range() },
        ]
    }

    fn forward(&self, inputs: &[f64], batch: usize) -> Vec<f64> {
        self.forward_cached(inputs, batch).2
    }

    fn loss_and_grad(&self, inputs: &[f64], targets: &[f64]) -> (f64, Vec<f64>) {
        let batch = targets.len();
        let h = self.hidden;
        let (z, a, out) = self.forward_cached(inputs, batch);
        let loss = mean_squared_error(&out, targets);
        let delta = output_delta(&out, targets);

        let mut grad = vec![0.0; self.params.len()];
        let w2 = &self.params[self.w2_range()];
        // dZ1 = (δ ⊗ w2) ⊙ f'(Z1)
        let mut dz = vec![0.0; batch * h];
        for s in 0..batch {
            for j in 0..h {
                let idx = s * h + j;
                dz[idx] = delta[s] * w2[j] * self.activation.derivative(z[idx], a[idx]);
            }
        }
        let w2_range = self.w2_range();
        gemm(h, batch, 1, 1.0, &a, true, &delta, false, 0.0, &mut grad[w2_range]);
        grad[self.b2_range()][0] = delta.iter().sum();
        let w1_range = self.w1_range();
        gemm(self.n_in, batch, h, 1.0, inputs, true, &dz, false, 0.0, &mut grad[w1_range]);
        let b1 = self.b1_range();
        for s in 0..batch {
            for j in 0..h {
                grad[b1.start + j] += dz[s * h + j];
            }
        }
        (loss, grad)
    }
}
