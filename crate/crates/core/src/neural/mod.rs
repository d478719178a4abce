//! Small neural regressors trained with Adam: a one-hidden-layer MLP, an
//! Elman RNN and an LSTM. Gradients are derived by hand (backpropagation
//! and backpropagation through time) and checked against finite differences
//! in the test suite.

mod adam;
mod dense;
mod lstm;
mod mlp;
mod network;
mod regressor;
mod rnn;

pub use adam::{adam_step, AdamState};
pub use dense::{forward_dense, Activation, DenseLayer};
pub use lstm::Lstm;
pub use mlp::Mlp;
pub use network::{clip_global_norm, Network, ParamBlock};
pub use regressor::{
    fit_lstm, fit_mlp, fit_network, fit_rnn, predict_neural, Architecture, NeuralRegressor,
    TrainConfig, TrainHistory, ANN_EPOCHS, LSTM_SCHEDULE, RNN_SCHEDULE,
};
pub use rnn::ElmanRnn;
