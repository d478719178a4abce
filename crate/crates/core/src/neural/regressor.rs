use alloc::vec::Vec;

use rand::Rng;

use super::adam::{adam_step, AdamState};
use super::dense::Activation;
use super::lstm::Lstm;
use super::mlp::Mlp;
use super::network::{clip_global_norm, Network};
use super::rnn::ElmanRnn;
use crate::dataset::{SequenceSet, SupervisedSet};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Architecture {
    Mlp,
    Rnn,
    Lstm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Global gradient-norm ceiling applied before each Adam step.
    pub clip_norm: Option<f64>,
}

/// `(ndays, epochs)` pairs for the recurrent nets.
pub const RNN_SCHEDULE: [(usize, usize); 6] = [(1, 100), (2, 200), (5, 300), (10, 500), (20, 800), (30, 1000)];
pub const LSTM_SCHEDULE: [(usize, usize); 6] = [(1, 50), (2, 50), (5, 70), (10, 100), (20, 200), (30, 300)];
pub const ANN_EPOCHS: [usize; 4] = [100, 200, 500, 1000];

fn scheduled_epochs(schedule: &[(usize, usize)], ndays: usize) -> usize {
    schedule
        .iter()
        .find(|(d, _)| *d >= ndays)
        .or(schedule.last())
        .map_or(100, |(_, e)| *e)
}

impl TrainConfig {
    /// 500 ReLU units, learning rate 0.01.
    pub fn ann(epochs: usize) -> Self {
        Self {
            hidden: 500,
            epochs,
            batch_size: 32,
            learning_rate: 0.01,
            seed: 0,
            clip_norm: None,
        }
    }

    /// 500 tanh units, learning rate 1e-4, epochs paired with `ndays`.
    pub fn rnn(ndays: usize) -> Self {
        Self {
            hidden: 500,
            epochs: scheduled_epochs(&RNN_SCHEDULE, ndays),
            batch_size: 32,
            learning_rate: 1e-4,
            seed: 0,
            clip_norm: Some(5.0),
        }
    }

    /// 200 units, learning rate 5e-4, epochs paired with `ndays`.
    pub fn lstm(ndays: usize) -> Self {
        Self {
            hidden: 200,
            epochs: scheduled_epochs(&LSTM_SCHEDULE, ndays),
            batch_size: 32,
            learning_rate: 5e-4,
            seed: 0,
            clip_norm: Some(5.0),
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_epochs(self, epochs: usize) -> Self {
        Self { epochs, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainHistory {
    /// Full-training-set loss before the first update.
    pub initial_loss: f64,
    /// Mean batch loss of each epoch.
    pub epoch_losses: Vec<f64>,
}

/// Runs mini-batch Adam on `net` for `config.epochs` passes over the data,
/// reshuffling the sample order each epoch.
pub fn fit_network<N: Network>(net: &mut N, inputs: &[f64], targets: &[f64], config: &TrainConfig) -> Result<TrainHistory> {
    let n = targets.len();
    let width = net.input_len();
    if n == 0 {
        return Err(Error::EmptyData);
    }
    if inputs.len() != n * width {
        return Err(Error::DimensionMismatch {
            expected: n * width,
            found: inputs.len(),
        });
    }
    if config.batch_size == 0 {
        return Err(Error::InvalidParameter("batch_size must be at least 1"));
    }
    let initial_loss = net.loss(inputs, targets);
    if !initial_loss.is_finite() {
        return Err(Error::Divergence { epoch: 0 });
    }

    let mut adam = AdamState::new(net.params().len(), config.learning_rate);
    let mut rng = rng_from_seed(derive_seed(config.seed, 1));
    let mut order: Vec<usize> = (0..n).collect();
    let mut batch_x = Vec::with_capacity(config.batch_size * width);
    let mut batch_y = Vec::with_capacity(config.batch_size);
    let mut epoch_losses = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        for i in (1..n).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let mut total = 0.0;
        for chunk in order.chunks(config.batch_size) {
            batch_x.clear();
            batch_y.clear();
            for &s in chunk {
                batch_x.extend_from_slice(&inputs[s * width..(s + 1) * width]);
                batch_y.push(targets[s]);
            }
            let (loss, mut grad) = net.loss_and_grad(&batch_x, &batch_y);
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Divergence { epoch });
            }
            if let Some(max_norm) = config.clip_norm {
                clip_global_norm(&mut grad, max_norm);
            }
            adam_step(net.params_mut(), &grad, &mut adam)?;
            total += loss * chunk.len() as f64;
        }
        epoch_losses.push(total / n as f64);
    }
    if net.params().iter().any(|p| !p.is_finite()) {
        return Err(Error::Divergence { epoch: config.epochs });
    }
    Ok(TrainHistory {
        initial_loss,
        epoch_losses,
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Net {
    Mlp(Mlp),
    Rnn(ElmanRnn),
    Lstm(Lstm),
}

impl Net {
    fn as_network(&self) -> &dyn Network {
        match self {
            Net::Mlp(n) => n,
            Net::Rnn(n) => n,
            Net::Lstm(n) => n,
        }
    }
}

/// A trained network together with the affine map between its output and
/// raw target units.
///
/// The network is fitted on standardized targets `(y − mean) / scale`;
/// predictions are mapped back, so callers only ever see raw index values.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuralRegressor {
    net: Net,
    target_mean: f64,
    target_scale: f64,
    history: TrainHistory,
}

fn target_standardization(targets: &[f64]) -> (f64, f64) {
    let n = targets.len() as f64;
    let mean = targets.iter().sum::<f64>() / n;
    let var = targets.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / n;
    let scale = libm::sqrt(var);
    (mean, if scale > 0.0 && scale.is_finite() { scale } else { 1.0 })
}

fn fit_wrapped(mut net: Net, inputs: &[f64], targets: &[f64], config: &TrainConfig) -> Result<NeuralRegressor> {
    if targets.is_empty() {
        return Err(Error::EmptyData);
    }
    let (target_mean, target_scale) = target_standardization(targets);
    let scaled: Vec<f64> = targets.iter().map(|t| (t - target_mean) / target_scale).collect();
    let history = match &mut net {
        Net::Mlp(n) => fit_network(n, inputs, &scaled, config)?,
        Net::Rnn(n) => fit_network(n, inputs, &scaled, config)?,
        Net::Lstm(n) => fit_network(n, inputs, &scaled, config)?,
    };
    Ok(NeuralRegressor {
        net,
        target_mean,
        target_scale,
        history,
    })
}

/// One hidden layer of `config.hidden` ReLU units and a linear output.
pub fn fit_mlp(train: &SupervisedSet, config: &TrainConfig) -> Result<NeuralRegressor> {
    let mut rng = rng_from_seed(derive_seed(config.seed, 0));
    let net = Mlp::new(train.features.cols(), config.hidden, Activation::Relu, &mut rng);
    fit_wrapped(Net::Mlp(net), train.features.as_slice(), &train.targets, config)
}

pub fn fit_rnn(train: &SequenceSet, config: &TrainConfig) -> Result<NeuralRegressor> {
    let mut rng = rng_from_seed(derive_seed(config.seed, 0));
    let net = ElmanRnn::new(train.n_features, config.hidden, train.ndays, &mut rng);
    fit_wrapped(Net::Rnn(net), &train.windows, &train.targets, config)
}

pub fn fit_lstm(train: &SequenceSet, config: &TrainConfig) -> Result<NeuralRegressor> {
    let mut rng = rng_from_seed(derive_seed(config.seed, 0));
    let net = Lstm::new(train.n_features, config.hidden, train.ndays, &mut rng);
    fit_wrapped(Net::Lstm(net), &train.windows, &train.targets, config)
}

/// Forward pass on flat inputs (`samples × input_len`), in raw target units.
pub fn predict_neural(model: &NeuralRegressor, inputs: &[f64]) -> Result<Vec<f64>> {
    model.predict_flat(inputs)
}

const PREDICT_CHUNK: usize = 256;

impl NeuralRegressor {
    pub fn architecture(&self) -> Architecture {
        match self.net {
            Net::Mlp(_) => Architecture::Mlp,
            Net::Rnn(_) => Architecture::Rnn,
            Net::Lstm(_) => Architecture::Lstm,
        }
    }

    pub fn history(&self) -> &TrainHistory {
        &self.history
    }

    pub fn input_len(&self) -> usize {
        self.net.as_network().input_len()
    }

    pub fn target_mean(&self) -> f64 {
        self.target_mean
    }

    pub fn target_scale(&self) -> f64 {
        self.target_scale
    }

    pub fn predict_flat(&self, inputs: &[f64]) -> Result<Vec<f64>> {
        let width = self.input_len();
        if width == 0 || inputs.len() % width != 0 {
            return Err(Error::DimensionMismatch {
                expected: width,
                found: inputs.len(),
            });
        }
        let net = self.net.as_network();
        let mut out = Vec::with_capacity(inputs.len() / width);
        for chunk in inputs.chunks(PREDICT_CHUNK * width) {
            let raw = net.forward(chunk, chunk.len() / width);
            out.extend(raw.iter().map(|v| v * self.target_scale + self.target_mean));
        }
        Ok(out)
    }

    pub fn predict_rows(&self, features: &Matrix) -> Result<Vec<f64>> {
        if self.architecture() != Architecture::Mlp {
            return Err(Error::InvalidParameter("recurrent models predict from sequences"));
        }
        self.predict_flat(features.as_slice())
    }

    pub fn predict_sequences(&self, set: &SequenceSet) -> Result<Vec<f64>> {
        if self.architecture() == Architecture::Mlp {
            return Err(Error::InvalidParameter("the MLP predicts from feature rows"));
        }
        self.predict_flat(&set.windows)
    }
}
