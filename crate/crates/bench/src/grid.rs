//! Runs every (model, horizon, parameter) cell and keeps the best parameter
//! per (model, horizon).

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use stockcast_core::indicators::{compute_indicator_matrix, IndicatorMatrix, OhlcSeries, DEFAULT_WINDOW};
use stockcast_core::metrics::{evaluate, EvalResult};
use stockcast_core::rng::derive_seed;

use crate::config::{ExperimentConfig, ModelKind, ParamKind};
use crate::error::{BenchError, Result};
use crate::models::{fit_and_forecast, Forecast};

/// Produces a test-set forecast for one grid cell.
pub trait Evaluator: Sync {
    fn forecast(&self, model: ModelKind, horizon: usize, param: usize, seed: u64) -> Result<Forecast>;
}

/// The real pipeline: indicators, dataset preparation, model fit.
pub struct PipelineEvaluator<'a> {
    config: &'a ExperimentConfig,
    matrix: IndicatorMatrix,
    closes: Vec<f64>,
}

impl<'a> PipelineEvaluator<'a> {
    pub fn new(config: &'a ExperimentConfig, series: &OhlcSeries) -> Result<Self> {
        Ok(Self {
            config,
            matrix: compute_indicator_matrix(series, DEFAULT_WINDOW)?,
            closes: series.closes(),
        })
    }
}

impl Evaluator for PipelineEvaluator<'_> {
    fn forecast(&self, model: ModelKind, horizon: usize, param: usize, seed: u64) -> Result<Forecast> {
        fit_and_forecast(self.config, &self.matrix, &self.closes, model, horizon, param, seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Job {
    pub model: ModelKind,
    pub horizon: usize,
    pub param: usize,
}

/// Seed for a cell; depends only on the run seed and the cell itself.
pub fn job_seed(seed: u64, job: &Job) -> u64 {
    let model = ModelKind::ALL.iter().position(|m| *m == job.model).unwrap_or(0) as u64;
    derive_seed(derive_seed(derive_seed(seed, model), job.horizon as u64), job.param as u64)
}

pub fn jobs(config: &ExperimentConfig) -> Vec<Job> {
    let mut out = Vec::new();
    for &model in &config.models {
        for &horizon in &config.horizons {
            for param in config.grid_for(model) {
                out.push(Job { model, horizon, param });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub job: Job,
    pub seed: u64,
    pub seconds: f64,
    pub outcome: std::result::Result<(EvalResult, Forecast), TrialError>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialError {
    pub message: String,
    pub divergence: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub model: ModelKind,
    pub horizon: usize,
    pub parameter: ParamKind,
    pub best_parameter: usize,
    pub mape: f64,
    pub mae: f64,
    pub r2: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actual: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted: Option<Vec<f64>>,
}

/// A grid cell that produced no usable forecast.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub model: ModelKind,
    pub horizon: usize,
    pub parameter: usize,
    pub message: String,
    pub divergence: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub model: ModelKind,
    pub horizon: usize,
    pub parameter: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GridOutcome {
    pub records: Vec<RunRecord>,
    pub failures: Vec<Failure>,
    pub timings: Vec<Timing>,
}

impl GridOutcome {
    pub fn diverged(&self) -> bool {
        self.failures.iter().any(|f| f.divergence)
    }
}

fn run_job(evaluator: &dyn Evaluator, job: Job, seed: u64) -> Trial {
    let start = Instant::now();
    let outcome = match evaluator.forecast(job.model, job.horizon, job.param, seed) {
        Ok(forecast) if forecast.predicted.iter().any(|p| !p.is_finite()) => Err(TrialError {
            message: "non-finite forecast".into(),
            divergence: true,
        }),
        Ok(forecast) => match evaluate(&forecast.actual, &forecast.predicted) {
            Ok(m) if m.mape.is_finite() && m.mae.is_finite() && m.r2.is_finite() => Ok((m, forecast)),
            Ok(_) => Err(TrialError {
                message: "non-finite metrics".into(),
                divergence: true,
            }),
            Err(e) => Err(TrialError {
                message: e.to_string(),
                divergence: false,
            }),
        },
        Err(e) => Err(TrialError {
            divergence: e.is_divergence(),
            message: e.to_string(),
        }),
    };
    Trial {
        job,
        seed,
        seconds: start.elapsed().as_secs_f64(),
        outcome,
    }
}

/// Evaluates every cell on `workers` threads. Output order follows `jobs`.
pub fn run_trials(config: &ExperimentConfig, evaluator: &dyn Evaluator) -> Vec<Trial> {
    let jobs = jobs(config);
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Trial>>> = Mutex::new(vec![None; jobs.len()]);
    std::thread::scope(|scope| {
        for _ in 0..config.workers.clamp(1, jobs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&job) = jobs.get(i) else { break };
                let trial = run_job(evaluator, job, job_seed(config.seed, &job));
                slots.lock().expect("no panics while holding the lock")[i] = Some(trial);
            });
        }
    });
    slots
        .into_inner()
        .expect("workers finished")
        .into_iter()
        .map(|t| t.expect("every job ran"))
        .collect()
}

/// Orders candidates by MAPE, then MAE, then the smaller parameter.
fn better(a: (&EvalResult, usize), b: (&EvalResult, usize)) -> bool {
    a.0.mape
        .total_cmp(&b.0.mape)
        .then(a.0.mae.total_cmp(&b.0.mae))
        .then(a.1.cmp(&b.1))
        .is_lt()
}

pub fn select_best(config: &ExperimentConfig, trials: Vec<Trial>) -> GridOutcome {
    let mut out = GridOutcome::default();
    let mut best: Vec<Option<(Trial, EvalResult)>> = Vec::new();
    let mut keys: Vec<(ModelKind, usize)> = Vec::new();
    for trial in trials {
        out.timings.push(Timing {
            model: trial.job.model,
            horizon: trial.job.horizon,
            parameter: trial.job.param,
            seconds: trial.seconds,
        });
        let key = (trial.job.model, trial.job.horizon);
        let slot = match keys.iter().position(|k| *k == key) {
            Some(i) => i,
            None => {
                keys.push(key);
                best.push(None);
                keys.len() - 1
            }
        };
        match &trial.outcome {
            Err(e) => out.failures.push(Failure {
                model: trial.job.model,
                horizon: trial.job.horizon,
                parameter: trial.job.param,
                message: e.message.clone(),
                divergence: e.divergence,
            }),
            Ok((m, _)) => {
                let m = *m;
                let replace = match &best[slot] {
                    None => true,
                    Some((t, bm)) => better((&m, trial.job.param), (bm, t.job.param)),
                };
                if replace {
                    best[slot] = Some((trial, m));
                }
            }
        }
    }
    for (trial, m) in best.into_iter().flatten() {
        let forecast = match trial.outcome {
            Ok((_, f)) => f,
            Err(_) => unreachable!("only successful trials are kept"),
        };
        let (actual, predicted) = if config.embed_predictions {
            (Some(forecast.actual), Some(forecast.predicted))
        } else {
            (None, None)
        };
        out.records.push(RunRecord {
            model: trial.job.model,
            horizon: trial.job.horizon,
            parameter: trial.job.model.param_kind(),
            best_parameter: trial.job.param,
            mape: m.mape,
            mae: m.mae,
            r2: m.r2,
            seed: trial.seed,
            actual,
            predicted,
        });
    }
    out.records.sort_by_key(|r| (r.model, r.horizon));
    out
}

pub fn run_grid_with(config: &ExperimentConfig, evaluator: &dyn Evaluator) -> Result<GridOutcome> {
    config.validate()?;
    Ok(select_best(config, run_trials(config, evaluator)))
}

pub fn run_grid_on(config: &ExperimentConfig, series: &OhlcSeries) -> Result<GridOutcome> {
    config.validate()?;
    let evaluator = PipelineEvaluator::new(config, series).map_err(|e| match e {
        BenchError::Model(e) => BenchError::Data {
            path: config.input.clone(),
            message: e.to_string(),
        },
        other => other,
    })?;
    run_grid_with(config, &evaluator)
}

pub fn run_grid(config: &ExperimentConfig) -> Result<GridOutcome> {
    config.validate()?;
    let series = crate::csv_io::load_ohlc_csv(&config.input)?;
    run_grid_on(config, &series)
}
