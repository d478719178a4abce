use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use super::network::{
    gather_step, glorot_fill, mean_squared_error, output_delta, sigmoid, Network, ParamBlock,
};
use crate::matrix::gemm;
use crate::rng::ModelRng;

/// Gate order inside the `4·hidden` pre-activation columns.
const GATE_I: usize = 0;
const GATE_F: usize = 1;
const GATE_G: usize = 2;
const GATE_O: usize = 3;

/// LSTM with input, forget and output gates and a tanh candidate:
///
/// ```text
/// c_t = f ⊙ c_{t−1} + i ⊙ g
/// h_t = o ⊙ tanh(c_t)
/// ```
///
/// followed by a linear readout of `h_T`. Parameter layout:
/// `Wx (in × 4h)`, `Wh (h × 4h)`, `b (4h)`, `w_out (h)`, `b_out`, with the
/// four gate blocks ordered `i, f, g, o` along the columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Lstm {
    n_in: usize,
    hidden: usize,
    ndays: usize,
    params: Vec<f64>,
}

struct Trace {
    xs: Vec<Vec<f64>>,
    /// Activated gates per step, `batch × 4h`.
    gates: Vec<Vec<f64>>,
    /// `c_0 ..= c_T`.
    cs: Vec<Vec<f64>>,
    /// `h_0 ..= h_T`.
    hs: Vec<Vec<f64>>,
    out: Vec<f64>,
}

impl Lstm {
    pub fn new(n_in: usize, hidden: usize, ndays: usize, rng: &mut ModelRng) -> Self {
        let g = 4 * hidden;
        let mut net = Self {
            n_in,
            hidden,
            ndays,
            params: vec![0.0; n_in * g + hidden * g + g + hidden + 1],
        };
        let (wx, wh, wo, b) = (net.wx(), net.wh(), net.w_out(), net.bias());
        glorot_fill(&mut net.params[wx], n_in, hidden, rng);
        glorot_fill(&mut net.params[wh], hidden, hidden, rng);
        glorot_fill(&mut net.params[wo], hidden, 1, rng);
        let forget = b.start + GATE_F * hidden;
        net.params[forget..forget + hidden].fill(1.0);
        net
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden
    }

    pub fn ndays(&self) -> usize {
        self.ndays
    }

    pub fn wx(&self) -> Range<usize> {
        0..self.n_in * 4 * self.hidden
    }
    pub fn wh(&self) -> Range<usize> {
        let s = self.wx().end;
        s..s + self.hidden * 4 * self.hidden
    }
    pub fn bias(&self) -> Range<usize> {
        let s = self.wh().end;
        s..s + 4 * self.hidden
    }
    pub fn w_out(&self) -> Range<usize> {
        let s = self.bias().end;
        s..s + self.hidden
    }
    pub fn b_out(&self) -> Range<usize> {
        let s = self.w_out().end;
        s..s + 1
    }

    /// Bias slice of one gate (`0 = i, 1 = f, 2 = g, 3 = o`).
    pub fn gate_bias_mut(&mut self, gate: usize) -> &mut [f64] {
        let start = self.bias().start + gate * self.hidden;
        &mut self.params[start..start + self.hidden]
    }

    /// Hidden and cell states `h_1..=h_T`, `c_1..=c_T` for one window.
    pub fn states(&self, window: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let tr = self.trace(window, 1);
        (tr.hs[1..].to_vec(), tr.cs[1..].to_vec())
    }

    fn trace(&self, inputs: &[f64], batch: usize) -> Trace {
        let (h, n_in) = (self.hidden, self.n_in);
        let g4 = 4 * h;
        let p = &self.params;
        let mut tr = Trace {
            xs: Vec::with_capacity(self.ndays),
            gates: Vec::with_capacity(self.ndays),
            cs: vec![vec![0.0; batch * h]],
            hs: vec![vec![0.0; batch * h]],
            out: Vec::new(),
        };
        for t in 0..self.ndays {
            let mut x_t = vec![0.0; batch * n_in];
            gather_step(inputs, batch, self.ndays, n_in, t, &mut x_t);
            let mut z = Vec::with_capacity(batch * g4);
            for _ in 0..batch {
                z.extend_from_slice(&p[self.bias()]);
            }
            gemm(batch, n_in, g4, 1.0, &x_t, false, &p[self.wx()], false, 1.0, &mut z);
            if t > 0 {
                gemm(batch, h, g4, 1.0, &tr.hs[t], false, &p[self.wh()], false, 1.0, &mut z);
            }
            let c_prev = &tr.cs[t];
            let mut c = vec![0.0; batch * h];
            let mut hn = vec![0.0; batch * h];
            for s in 0..batch {
                let row = &mut z[s * g4..(s + 1) * g4];
                for j in 0..h {
                    let i_g = sigmoid(row[GATE_I * h + j]);
                    let f_g = sigmoid(row[GATE_F * h + j]);
                    let g_g = libm::tanh(row[GATE_G * h + j]);
                    let o_g = sigmoid(row[GATE_O * h + j]);
                    row[GATE_I * h + j] = i_g;
                    row[GATE_F * h + j] = f_g;
                    row[GATE_G * h + j] = g_g;
                    row[GATE_O * h + j] = o_g;
                    let idx = s * h + j;
                    c[idx] = f_g * c_prev[idx] + i_g * g_g;
                    hn[idx] = o_g * libm::tanh(c[idx]);
                }
            }
            tr.xs.push(x_t);
            tr.gates.push(z);
            tr.cs.push(c);
            tr.hs.push(hn);
        }
        let mut out = vec![p[self.b_out()][0]; batch];
        gemm(batch, h, 1, 1.0, &tr.hs[self.ndays], false, &p[self.w_out()], false, 1.0, &mut out);
        tr.out = out;
        tr
    }
}

impl Network for Lstm {
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
            ParamBlock { name: "gate.bias", range: self.bias() },
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
        let g4 = 4 * h;
        let tr = self.trace(inputs, batch);
        let loss = mean_squared_error(&tr.out, targets);
        let delta = output_delta(&tr.out, targets);
        let p = &self.params;
        let mut grad = vec![0.0; p.len()];

        let r = self.w_out();
        gemm(h, batch, 1, 1.0, &tr.hs[self.ndays], true, &delta, false, 0.0, &mut grad[r]);
        grad[self.b_out()][0] = delta.iter().sum();

        let w_out = &p[self.w_out()];
        let mut dh = vec![0.0; batch * h];
        for s in 0..batch {
            for j in 0..h {
                dh[s * h + j] = delta[s] * w_out[j];
            }
        }
        let mut dc = vec![0.0; batch * h];
        let mut dz = vec![0.0; batch * g4];
        let (wx, wh, bias) = (self.wx(), self.wh(), self.bias());
        for t in (1..=self.ndays).rev() {
            let gates = &tr.gates[t - 1];
            let (c, c_prev) = (&tr.cs[t], &tr.cs[t - 1]);
            for s in 0..batch {
                let gr = &gates[s * g4..(s + 1) * g4];
                let dzr = &mut dz[s * g4..(s + 1) * g4];
                for j in 0..h {
                    let idx = s * h + j;
                    let (i_g, f_g, g_g, o_g) = (gr[GATE_I * h + j], gr[GATE_F * h + j], gr[GATE_G * h + j], gr[GATE_O * h + j]);
                    let tanh_c = libm::tanh(c[idx]);
                    let d_o = dh[idx] * tanh_c;
                    let d_c = dc[idx] + dh[idx] * o_g * (1.0 - tanh_c * tanh_c);
                    dzr[GATE_I * h + j] = d_c * g_g * i_g * (1.0 - i_g);
                    dzr[GATE_F * h + j] = d_c * c_prev[idx] * f_g * (1.0 - f_g);
                    dzr[GATE_G * h + j] = d_c * i_g * (1.0 - g_g * g_g);
                    dzr[GATE_O * h + j] = d_o * o_g * (1.0 - o_g);
                    dc[idx] = d_c * f_g;
                }
            }
            gemm(n_in, batch, g4, 1.0, &tr.xs[t - 1], true, &dz, false, 1.0, &mut grad[wx.clone()]);
            if t > 1 {
                gemm(h, batch, g4, 1.0, &tr.hs[t - 1], true, &dz, false, 1.0, &mut grad[wh.clone()]);
                gemm(batch, g4, h, 1.0, &dz, false, &p[wh.clone()], true, 0.0, &mut dh);
            }
            for s in 0..batch {
                for j in 0..g4 {
                    grad[bias.start + j] += dz[s * g4 + j];
                }
            }
        }
        (loss, grad)
    }
}
