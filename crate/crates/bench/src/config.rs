use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Dtree,
    Bagging,
    Rf,
    Adaboost,
    Gb,
    Xgb,
    Ann,
    Rnn,
    Lstm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    Ntrees,
    Epochs,
    Ndays,
}

impl ParamKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ParamKind::Ntrees => "ntrees",
            ParamKind::Epochs => "epochs",
            ParamKind::Ndays => "ndays",
        }
    }
}

impl ModelKind {
    pub const ALL: [ModelKind; 9] = [
        ModelKind::Dtree,
        ModelKind::Bagging,
        ModelKind::Rf,
        ModelKind::Adaboost,
        ModelKind::Gb,
        ModelKind::Xgb,
        ModelKind::Ann,
        ModelKind::Rnn,
        ModelKind::Lstm,
    ];

    pub fn code(self) -> &'static str {
        match self {
            ModelKind::Dtree => "dtree",
            ModelKind::Bagging => "bagging",
            ModelKind::Rf => "rf",
            ModelKind::Adaboost => "adaboost",
            ModelKind::Gb => "gb",
            ModelKind::Xgb => "xgb",
            ModelKind::Ann => "ann",
            ModelKind::Rnn => "rnn",
            ModelKind::Lstm => "lstm",
        }
    }

    /// Row label used in the text tables.
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Dtree => "Decision Tree",
            ModelKind::Bagging => "Bagging",
            ModelKind::Rf => "Random Forest",
            ModelKind::Adaboost => "Adaboost",
            ModelKind::Gb => "Gradient Boosting",
            ModelKind::Xgb => "XGBoost",
            ModelKind::Ann => "ANN",
            ModelKind::Rnn => "RNN",
            ModelKind::Lstm => "LSTM",
        }
    }

    pub fn param_kind(self) -> ParamKind {
        match self {
            ModelKind::Ann => ParamKind::Epochs,
            ModelKind::Rnn | ModelKind::Lstm => ParamKind::Ndays,
            _ => ParamKind::Ntrees,
        }
    }

    pub fn is_tree(self) -> bool {
        self.param_kind() == ParamKind::Ntrees
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for ModelKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        ModelKind::ALL
            .into_iter()
            .find(|m| m.code() == s)
            .ok_or_else(|| BenchError::Config(format!("unknown model `{s}`")))
    }
}

pub fn parse_models(text: &str) -> Result<Vec<ModelKind>> {
    if text.trim() == "all" {
        return Ok(ModelKind::ALL.to_vec());
    }
    let mut models = text.split(',').map(str::parse).collect::<Result<Vec<ModelKind>>>()?;
    models.sort();
    models.dedup();
    Ok(models)
}

/// Parses `a,b,c` or an inclusive stepped range `start..end:step`.
pub fn parse_grid(text: &str) -> Result<Vec<usize>> {
    let bad = || BenchError::Config(format!("invalid grid `{text}`"));
    let text = text.trim();
    let mut values = if let Some((range, step)) = text.split_once(':') {
        let (start, end) = range.split_once("..").ok_or_else(bad)?;
        let start: usize = start.trim().parse().map_err(|_| bad())?;
        let end: usize = end.trim().parse().map_err(|_| bad())?;
        let step: usize = step.trim().parse().map_err(|_| bad())?;
        if step == 0 || end < start {
            return Err(bad());
        }
        (start..=end).step_by(step).collect::<Vec<_>>()
    } else {
        text.split(',')
            .map(|v| v.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?
    };
    if values.is_empty() || values.contains(&0) {
        return Err(bad());
    }
    values.sort_unstable();
    values.dedup();
    Ok(values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub input: PathBuf,
    pub models: Vec<ModelKind>,
    pub horizons: Vec<usize>,
    /// Ensemble sizes tried for every tree model except the lone tree.
    pub ntrees: Vec<usize>,
    /// Epoch budgets tried for the ANN.
    pub ann_epochs: Vec<usize>,
    /// Lookback lengths tried for RNN and LSTM; epochs follow the paired schedule.
    pub ndays: Vec<usize>,
    /// Multiplies every epoch count (0.5 halves the schedule).
    pub epoch_scale: f64,
    pub train_ratio: f64,
    pub seed: u64,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub workers: usize,
    /// Store test-set forecasts in `report.json`.
    pub embed_predictions: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            input: PathBuf::new(),
            models: ModelKind::ALL.to_vec(),
            horizons: vec![1, 2, 5, 10, 15, 20, 30],
            ntrees: (50..=500).step_by(50).collect(),
            ann_epochs: stockcast_core::neural::ANN_EPOCHS.to_vec(),
            ndays: vec![1, 2, 5, 10, 20, 30],
            epoch_scale: 1.0,
            train_ratio: stockcast_core::dataset::DEFAULT_TRAIN_RATIO,
            seed: 0,
            out: PathBuf::from("report"),
            workers: 1,
            embed_predictions: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(BenchError::Config(m.to_string()));
        if self.models.is_empty() {
            return fail("no models selected");
        }
        if self.horizons.is_empty() || self.horizons.contains(&0) {
            return fail("horizons must be a non-empty list of positive integers");
        }
        if self.ntrees.is_empty() || self.ann_epochs.is_empty() || self.ndays.is_empty() {
            return fail("parameter grids must be non-empty");
        }
        if [&self.ntrees, &self.ann_epochs, &self.ndays].iter().any(|g| g.contains(&0)) {
            return fail("grid values must be positive");
        }
        if !(self.train_ratio > 0.0 && self.train_ratio < 1.0) {
            return fail("train ratio must lie in (0, 1)");
        }
        if !(self.epoch_scale > 0.0 && self.epoch_scale.is_finite()) {
            return fail("epoch scale must be positive");
        }
        if self.workers == 0 {
            return fail("at least one worker is required");
        }
        Ok(())
    }

    /// Parameter values tried for `model`; the lone decision tree always uses 1.
    pub fn grid_for(&self, model: ModelKind) -> Vec<usize> {
        match model {
            ModelKind::Dtree => vec![1],
            ModelKind::Ann => self.ann_epochs.clone(),
            ModelKind::Rnn | ModelKind::Lstm => self.ndays.clone(),
            _ => self.ntrees.clone(),
        }
    }

    pub fn scale_epochs(&self, epochs: usize) -> usize {
        ((epochs as f64 * self.epoch_scale).round() as usize).max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("50..500:50").unwrap(), (1..=10).map(|i| i * 50).collect::<Vec<_>>());
        assert_eq!(parse_grid("5, 1,2").unwrap(), vec![1, 2, 5]);
        assert!(parse_grid("0,1").is_err());
        assert!(parse_grid("10..5:1").is_err());
        assert!(parse_grid("1..5:0").is_err());
        assert!(parse_grid("").is_err());
    }

    #[test]
    fn models() {
        assert_eq!(parse_models("lstm,dtree").unwrap(), vec![ModelKind::Dtree, ModelKind::Lstm]);
        assert_eq!(parse_models("all").unwrap().len(), 9);
        assert!(parse_models("svm").is_err());
    }

    #[test]
    fn lone_tree_grid_is_one() {
        let c = ExperimentConfig::default();
        assert_eq!(c.grid_for(ModelKind::Dtree), vec![1]);
        assert_eq!(c.grid_for(ModelKind::Xgb).len(), 10);
        assert!(c.validate().is_ok());
        assert!(ExperimentConfig { train_ratio: 1.0, ..c }.validate().is_err());
    }
}
