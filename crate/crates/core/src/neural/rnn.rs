use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use super::network::{gather_step, glorot_fill, mean_squared_error, output_delta, Network, ParamBlock};
use crate::matrix::gemm;
use crate::rng::ModelRng;

/// Elman network `h_t = tanh(x_t·Wx + h_{t−1}·Wh + b)`, `h_0 = 0`, with a
/// linear readout of the last hidden state.
///
/// Parameter layout: `Wx (in × hidden)`, `Wh (hidden × hidden)`, `b`,
/// `w_out (hidden)`, `b_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElmanRnn {
    n_in: usize,
    hidden: usize,
    ndays: usize,
    params: Vec<f64>,
}

struct Trace {
    /// Gathered inputs per step, each `batch × n_in`.
    xs: Vec<Vec<f64>>,
    /// Hidden states `h_0 ..= h_T`, each `batch × hidden`.
    hs: Vec<Vec<f64>>,
    out: Vec<f64>,
}

impl ElmanRnn {
    pub fn new(n_in: usize, hidden: usize, ndays: usize, rng: &mut ModelRng) -> Self {
        let mut net = Self {
            n_in,
            hidden,
            ndays,
            params: vec![0.0; n_in * hidden + hidden * hidden + 2 * hidden + 1],
        };
        let (wx, wh, wo) = (net.wx(), net.wh(), net.w_out());
        glorot_fill(&mut net.params[wx], n_in, hidden, rng);
        glorot_fill(&mut net.params[wh], hidden, hidden, rng);
        glorot_fill(&mut net.params[wo], hidden, 1, rng);
        net
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden
    }

    pub fn ndays(&self) -> usize {
        self.ndays
    }

    pub fn wx(&self) -> Range<usize> {
        0..self.n_in * self.hidden
    }
    pub fn wh(&self) -> Range<usize> {
        let s = self.wx().end;
        s..s + self.hidden * self.hidden
    }
    pub fn bias(&self) -> Range<usize> {
        let s = self.wh().end;
        s..s + self.hidden
    }
    pub fn w_out(&self) -> Range<usize> {
        let s = self.bias().end;
        s..s + self.hidden
    }
    pub fn b_out(&self) -> Range<usize> {
        let s = self.w_out().end;
        s..s + 1
    }

    fn trace(&self, inputs: &[f64], batch: usize) -> Trace {
        let (h, n_in) = (self.hidden, self.n_in);
        let p = &self.params;
        let mut xs = Vec::with_capacity(self.ndays);
        let mut hs = Vec::with_capacity(self.ndays + 1);
        hs.push(vec![0.0; batch * h]);
        for t in 0..self.ndays {
            let mut x_t = vec![0.0; batch * n_in];
            gather_step(inputs, batch, self.ndays, n_in, t, &mut x_t);
            let mut a = Vec::with_capacity(batch * h);
            for _ in 0..batch {
                a.extend_from_slice(&p[self.bias()]);
            }
            gemm(batch, n_in, h, 1.0, &x_t, false, &p[self.wx()], false, 1.0, &mut a);
            if t > 0 {
                gemm(batch, h, h, 1.0, &hs[t], false, &p[self.wh()], false, 1.0, &mut a);
            }
            a.iter_mut().for_each(|v| *v = libm::tanh(*v));
            xs.push(x_t);
            hs.push(a);
        }
        let mut out = vec![p[self.b_out()][0]; batch];
        gemm(batch, h, 1, 1.0, &hs[self.ndays], false, &p[self.w_out()], false, 1.0, &mut out);
        Trace { xs, hs, out }
    }
}

impl Network for ElmanRnn {
    fn input_len(&self) -> usize {
        self.ndays * self.n_in
    }

    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn blocks(&self) -> Vec<ParamBlock> {
        vec![
            ParamBlock { name: "input.weights", range: self.wx() },
            ParamBlock { name: "recurrent.weights", range: self.wh() },
            ParamBlock { name: "recurrent.bias", range: self.bias() },
            ParamBlock { name: "output.weights", range: self.w_out() },
            ParamBlock { name: "output.bias", range: self.b_out() },
        ]
    }

    fn forward(&self, inputs: &[f64], batch: usize) -> Vec<f64> {
        self.trace(inputs, batch).out
    }

    fn loss_and_grad(&self, inputs: &[f64], targets: &[f64]) -> (f64, Vec<f64>) {
        let batch = targets.len();
        let (h, n_in) = (self.hidden, self.n_in);
        let tr = self.trace(inputs, batch);
        let loss = mean_squared_error(&tr.out, targets);
        let delta = output_delta(&tr.out, targets);
        let p = &self.params;
        let mut grad = vec![0.0; p.len()];

        let w_out = &p[self.w_out()];
        let r = self.w_out();
        gemm(h, batch, 1, 1.0, &tr.hs[self.ndays], true, &delta, false, 0.0, &mut grad[r]);
        grad[self.b_out()][0] = delta.iter().sum();

        let mut dh = vec![0.0; batch * h];
        for s in 0..batch {
            for j in 0..h {
                dh[s * h + j] = delta[s] * w_out[j];
            }
        }
        let mut da = vec![0.0; batch * h];
        let (wx, wh, bias) = (self.wx(), self.wh(), self.bias());
        for t in (1..=self.ndays).rev() {
            let h_t = &tr.hs[t];
            for (i, d) in da.iter_mut().enumerate() {
                *d = dh[i] * (1.0 - h_t[i] * h_t[i]);
            }
            gemm(n_in, batch, h, 1.0, &tr.xs[t - 1], true, &da, false, 1.0, &mut grad[wx.clone()]);
            if t > 1 {
                gemm(h, batch, h, 1.0, &tr.hs[t - 1], true, &da, false, 1.0, &mut grad[wh.clone()]);
                gemm(batch, h, h, 1.0, &da, false, &p[wh.clone()], true, 0.0, &mut dh);
            }
            for s in 0..batch {
                for j in 0..h {
                    grad[bias.start + j] += da[s * h + j];
                }
            }
        }
        (loss, grad)
    }
}
