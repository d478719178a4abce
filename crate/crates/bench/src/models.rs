//! Fits one model for one (horizon, parameter) cell and forecasts the test
//! slice.

use stockcast_core::dataset::{prepare_sequences, prepare_tabular};
use stockcast_core::indicators::IndicatorMatrix;
use stockcast_core::neural::{fit_lstm, fit_mlp, fit_rnn, TrainConfig};
use stockcast_core::trees::{fit_ensemble, EnsembleKind, EnsembleParams};

use crate::config::{ExperimentConfig, ModelKind};
use crate::error::Result;

/// Test-set targets and the model's forecasts for them.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    pub actual: Vec<f64>,
    pub predicted: Vec<f64>,
}

fn ensemble_kind(model: ModelKind) -> Option<EnsembleKind> {
    Some(match model {
        ModelKind::Dtree => EnsembleKind::Single,
        ModelKind::Bagging => EnsembleKind::Bagging,
        ModelKind::Rf => EnsembleKind::RandomForest,
        ModelKind::Adaboost => EnsembleKind::AdaBoostR2,
        ModelKind::Gb => EnsembleKind::GradientBoosting,
        ModelKind::Xgb => EnsembleKind::XgbLike,
        _ => return None,
    })
}

/// Epoch budget used for `model` at grid value `param`.
pub fn epochs_for(config: &ExperimentConfig, model: ModelKind, param: usize) -> Option<usize> {
    let raw = match model {
        ModelKind::Ann => param,
        ModelKind::Rnn => TrainConfig::rnn(param).epochs,
        ModelKind::Lstm => TrainConfig::lstm(param).epochs,
        _ => return None,
    };
    Some(config.scale_epochs(raw))
}

pub fn fit_and_forecast(
    config: &ExperimentConfig,
    matrix: &IndicatorMatrix,
    index: &[f64],
    model: ModelKind,
    horizon: usize,
    param: usize,
    seed: u64,
) -> Result<Forecast> {
    if let Some(kind) = ensemble_kind(model) {
        let data = prepare_tabular(matrix, index, horizon, config.train_ratio)?;
        let params = EnsembleParams {
            ntrees: param,
            seed,
            ..EnsembleParams::default()
        };
        let fitted = fit_ensemble(kind, &data.train.features, &data.train.targets, &params)?;
        return Ok(Forecast {
            predicted: fitted.predict(&data.test.features)?,
            actual: data.test.targets,
        });
    }
    let epochs = epochs_for(config, model, param).expect("neural model");
    match model {
        ModelKind::Ann => {
            let data = prepare_tabular(matrix, index, horizon, config.train_ratio)?;
            let fitted = fit_mlp(&data.train, &TrainConfig::ann(epochs).with_seed(seed))?;
            Ok(Forecast {
                predicted: fitted.predict_rows(&data.test.features)?,
                actual: data.test.targets,
            })
        }
        ModelKind::Rnn | ModelKind::Lstm => {
            let data = prepare_sequences(matrix, index, horizon, param, config.train_ratio)?;
            let train_config = if model == ModelKind::Rnn {
                TrainConfig::rnn(param)
            } else {
                TrainConfig::lstm(param)
            };
            let train_config = train_config.with_epochs(epochs).with_seed(seed);
            let fitted = if model == ModelKind::Rnn {
                fit_rnn(&data.train, &train_config)?
            } else {
                fit_lstm(&data.train, &train_config)?
            };
            Ok(Forecast {
                predicted: fitted.predict_sequences(&data.test)?,
                actual: data.test.targets,
            })
        }
        _ => unreachable!("tree models handled above"),
    }
}
