use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stockcast_bench::config::{parse_grid, parse_models, ExperimentConfig};
use stockcast_bench::csv_io::write_ohlc_csv;
use stockcast_bench::grid::run_grid;
use stockcast_bench::report::{write_report, Report};
use stockcast_bench::synth::{generate, SynthSpec};
use stockcast_bench::{BenchError, Result};

#[derive(Parser)]
#[command(name = "bench", version, about = "Forecasting benchmark over OHLC series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the model x horizon x parameter grid and write reports.
    Run(RunArgs),
    /// Write a synthetic OHLC series as CSV.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2500)]
        bars: usize,
        /// Add seeded noise.
        #[arg(long)]
        noise_seed: Option<u64>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    input: PathBuf,
    /// Comma list from dtree,bagging,rf,adaboost,gb,xgb,ann,rnn,lstm or `all`.
    #[arg(long, default_value = "all")]
    models: String,
    #[arg(long, default_value = "1,2,5,10,15,20,30")]
    horizons: String,
    #[arg(long, default_value = "50..500:50")]
    ntrees: String,
    #[arg(long, default_value = "100,200,500,1000")]
    epochs: String,
    #[arg(long, default_value = "1,2,5,10,20,30")]
    ndays: String,
    #[arg(long, default_value_t = 0.8)]
    train_ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Multiplier on every epoch count.
    #[arg(long, default_value_t = 1.0)]
    epoch_scale: f64,
    /// Store test-set forecasts in report.json.
    #[arg(long)]
    embed_predictions: bool,
}

impl RunArgs {
    fn into_config(self) -> Result<ExperimentConfig> {
        let config = ExperimentConfig {
            input: self.input,
            models: parse_models(&self.models)?,
            horizons: parse_grid(&self.horizons)?,
            ntrees: parse_grid(&self.ntrees)?,
            ann_epochs: parse_grid(&self.epochs)?,
            ndays: parse_grid(&self.ndays)?,
            epoch_scale: self.epoch_scale,
            train_ratio: self.train_ratio,
            seed: self.seed,
            out: self.out,
            workers: self.workers,
            embed_predictions: self.embed_predictions,
        };
        config.validate()?;
        Ok(config)
    }
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let config = args.into_config()?;
    let outcome = run_grid(&config)?;
    for f in &outcome.failures {
        eprintln!("warning: {} h={} param={}: {}", f.model, f.horizon, f.parameter, f.message);
    }
    if outcome.records.is_empty() {
        let message = "every grid cell failed".to_string();
        return Err(match outcome.diverged() {
            true => BenchError::Model(stockcast_core::Error::Divergence { epoch: 0 }),
            false => BenchError::Data {
                path: config.input.clone(),
                message,
            },
        });
    }
    let report = Report::new(&config, &outcome)?;
    write_report(&report, &outcome.timings, &config.out)?;
    print!("{}", stockcast_bench::report::render_text(&report));
    Ok(if outcome.diverged() { ExitCode::from(3) } else { ExitCode::SUCCESS })
}

fn synth(out: PathBuf, bars: usize, noise_seed: Option<u64>) -> Result<ExitCode> {
    let mut spec = SynthSpec { bars, ..SynthSpec::default() };
    if let Some(seed) = noise_seed {
        spec = spec.with_noise(seed);
    }
    let file = std::fs::File::create(&out).map_err(|e| BenchError::Io(out.clone(), e))?;
    write_ohlc_csv(&generate(&spec), std::io::BufWriter::new(file)).map_err(|e| BenchError::Io(out, e))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Synth { out, bars, noise_seed } => synth(out, bars, noise_seed),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
