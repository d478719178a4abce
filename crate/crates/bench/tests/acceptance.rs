//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Run with `cargo test -p stockcast-bench --test acceptance`.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use rand::Rng;
use stockcast_bench::config::{ExperimentConfig, ModelKind};
use stockcast_bench::csv_io::write_ohlc_csv;
use stockcast_bench::grid::{run_grid_on, GridOutcome};
use stockcast_bench::synth::{generate, SynthSpec};
use stockcast_core::indicators::{compute_indicator_matrix, OhlcBar, OhlcSeries, FEATURE_COUNT, FEATURE_NAMES};
use stockcast_core::metrics::{mae, mape, r2};
use stockcast_core::neural::{Activation, ElmanRnn, Lstm, Mlp, Network};
use stockcast_core::rng::rng_from_seed;
use stockcast_core::trees::{fit_decision_tree, fit_gradient_boosting, fit_xgb_like, EnsembleParams, FeatureSubset, TreeNode};
use stockcast_core::{Error, Matrix};

type Outcome = Result<String, String>;

const N: usize = 10;

fn close_to(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn random_series(len: usize, seed: u64) -> OhlcSeries {
    let mut rng = rng_from_seed(seed);
    let start = NaiveDate::from_ymd_opt(2012, 3, 1).unwrap();
    let mut close: f64 = rng.random_range(50.0..5000.0);
    let bars = (0..len)
        .map(|i| {
            let open = close * (1.0 + rng.random_range(-0.01..0.01));
            close *= 1.0 + rng.random_range(-0.03..0.03);
            let high = open.max(close) * (1.0 + rng.random_range(0.0..0.02));
            let low = open.min(close) * (1.0 - rng.random_range(0.0..0.02));
            OhlcBar::new(start + chrono::Duration::days(i as i64), open, high, low, close).unwrap()
        })
        .collect();
    OhlcSeries::new(bars).unwrap()
}

/// Brute-force indicator rows, evaluated straight from the definitions.
fn naive_rows(series: &OhlcSeries, first: usize) -> Vec<[f64; FEATURE_COUNT]> {
    let c = series.closes();
    let h = series.highs();
    let l = series.lows();
    let n = N as f64;
    let ema = |k: f64, v: &[f64]| {
        let a = 2.0 / (k + 1.0);
        let mut out = vec![v[0]];
        for t in 1..v.len() {
            out.push(a * v[t] + (1.0 - a) * out[t - 1]);
        }
        out
    };
    let (e12, e26) = (ema(12.0, &c), ema(26.0, &c));
    let macd: Vec<f64> = e12.iter().zip(&e26).map(|(a, b)| a - b).collect();
    let signal = ema(n, &macd);
    let hh = |t: usize| (t + 1 - N..=t).map(|i| h[i]).fold(f64::MIN, f64::max);
    let ll = |t: usize| (t + 1 - N..=t).map(|i| l[i]).fold(f64::MAX, f64::min);
    let k = |t: usize| if hh(t) == ll(t) { 50.0 } else { 100.0 * (c[t] - ll(t)) / (hh(t) - ll(t)) };
    let m = |t: usize| (h[t] + l[t] + c[t]) / 3.0;
    (first..c.len())
        .map(|t| {
            let window = t + 1 - N..=t;
            let sma = window.clone().map(|i| c[i]).sum::<f64>() / n;
            let wma = window.clone().map(|i| (i + N - t) as f64 * c[i]).sum::<f64>() / (n * (n + 1.0) / 2.0);
            let up: f64 = window.clone().map(|i| (c[i] - c[i - 1]).max(0.0)).sum();
            let dw: f64 = window.clone().map(|i| (c[i - 1] - c[i]).max(0.0)).sum();
            let rsi = match (up == 0.0, dw == 0.0) {
                (true, true) => 50.0,
                (_, true) => 100.0,
                _ => 100.0 - 100.0 / (1.0 + up / dw),
            };
            let sm = window.clone().map(m).sum::<f64>() / n;
            let dev = window.clone().map(|i| (m(i) - sm).abs()).sum::<f64>() / n;
            [
                sma,
                wma,
                c[t] - c[t + 1 - N],
                k(t),
                window.clone().map(k).sum::<f64>() / n,
                rsi,
                signal[t],
                if hh(t) == ll(t) { 50.0 } else { 100.0 * (hh(t) - c[t]) / (hh(t) - ll(t)) },
                if h[t] == l[t] { 0.5 } else { (h[t] - c[t]) / (h[t] - l[t]) },
                if dev == 0.0 { 0.0 } else { (m(t) - sm) / (0.015 * dev) },
            ]
        })
        .collect()
}

fn indicator_oracle() -> Outcome {
    let start = Instant::now();
    let mut compared = 0usize;
    for seed in 0..50 {
        let series = random_series(200, 1000 + seed);
        let matrix = compute_indicator_matrix(&series, N).map_err(|e| e.to_string())?;
        let naive = naive_rows(&series, matrix.valid_from());
        for (t, (row, want)) in matrix.rows()[matrix.valid_from()..].iter().zip(&naive).enumerate() {
            let got = row.ok_or("missing row after warm-up")?.to_array();
            for j in 0..FEATURE_COUNT {
                if !close_to(got[j], want[j], 1e-9) {
                    return Err(format!("seed {seed} row {t} {}: {} vs {}", FEATURE_NAMES[j], got[j], want[j]));
                }
                compared += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(5) {
        return Err(format!("took {elapsed:.2?}"));
    }
    Ok(format!("{compared} values on 50 series, {elapsed:.2?}"))
}

fn algebraic_identities() -> Outcome {
    let mut checked = 0usize;
    for seed in 0..50 {
        let series = random_series(200, 2000 + seed);
        let base = compute_indicator_matrix(&series, N).map_err(|e| e.to_string())?;
        let scaled = compute_indicator_matrix(&series.scaled(7.3).map_err(|e| e.to_string())?, N).map_err(|e| e.to_string())?;
        for (a, b) in base.rows().iter().zip(scaled.rows()) {
            let (Some(a), Some(b)) = (a, b) else { continue };
            if (a.stoch_k + a.williams_r - 100.0).abs() > 1e-9 {
                return Err(format!("seed {seed}: K + R = {}", a.stoch_k + a.williams_r));
            }
            let pairs = [
                ("stoch_k", a.stoch_k, b.stoch_k),
                ("stoch_d", a.stoch_d, b.stoch_d),
                ("rsi", a.rsi, b.rsi),
                ("williams_r", a.williams_r, b.williams_r),
                ("ad_osc", a.ad_osc, b.ad_osc),
                ("cci", a.cci, b.cci),
            ];
            for (name, x, y) in pairs {
                if !close_to(y, x, 1e-9) {
                    return Err(format!("seed {seed} {name}: {x} vs {y} after scaling"));
                }
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} rows, complement and 7.3x scale invariance"))
}

fn sse(v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len().max(1) as f64;
    v.iter().map(|x| (x - mean) * (x - mean)).sum()
}

fn split_sse(x: &Matrix, y: &[f64], f: usize, t: f64) -> f64 {
    let (mut l, mut r) = (Vec::new(), Vec::new());
    for (i, &v) in y.iter().enumerate() {
        if x.get(i, f) <= t { l.push(v) } else { r.push(v) }
    }
    sse(&l) + sse(&r)
}

fn tree_split_oracle() -> Outcome {
    let mut agreed = 0;
    for seed in 0..200u64 {
        let mut rng = rng_from_seed(3000 + seed);
        let rows = rng.random_range(2..=8);
        let cols = rng.random_range(1..=2);
        let data = (0..rows * cols).map(|_| rng.random_range(0..5) as f64).collect();
        let x = Matrix::new(rows, cols, data).unwrap();
        let y: Vec<f64> = (0..rows).map(|_| rng.random_range(-10.0..10.0)).collect();
        let mut best: Option<f64> = None;
        for f in 0..cols {
            let mut v: Vec<f64> = x.column(f).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            for w in v.windows(2) {
                let s = split_sse(&x, &y, f, (w[0] + w[1]) / 2.0);
                best = Some(best.map_or(s, |b: f64| b.min(s)));
            }
        }
        let tree = fit_decision_tree(&x, &y, Some(1), FeatureSubset::All, 2, &mut rng_from_seed(0)).map_err(|e| e.to_string())?;
        let ok = match (tree.root(), best) {
            (TreeNode::Split { feature, threshold, .. }, Some(b)) => {
                (split_sse(&x, &y, *feature, *threshold) - b).abs() <= 1e-9 * b.abs().max(1.0)
            }
            (TreeNode::Leaf { .. }, None) => true,
            (TreeNode::Leaf { .. }, Some(b)) => (sse(&y) - b).abs() <= 1e-9 * b.abs().max(1.0),
            (TreeNode::Split { .. }, None) => false,
        };
        if !ok {
            return Err(format!("dataset {seed} disagrees with exhaustive search"));
        }
        agreed += 1;
    }
    Ok(format!("{agreed}/200 root splits optimal"))
}

fn boosting_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let mut rng = rng_from_seed(4000 + seed);
        let rows = rng.random_range(20..80);
        let data: Vec<f64> = (0..rows * 3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = Matrix::new(rows, 3, data).unwrap();
        let y: Vec<f64> = x.iter_rows().map(|r| r[0] * r[1] + (3.0 * r[2]).sin() + rng.random_range(-0.2..0.2)).collect();
        let params = EnsembleParams {
            ntrees: 25,
            max_depth: Some(4),
            lambda: 0.0,
            gamma: 0.0,
            seed,
            ..EnsembleParams::default()
        };
        let gb = fit_gradient_boosting(&x, &y, &params).and_then(|m| m.predict(&x)).map_err(|e| e.to_string())?;
        let xgb = fit_xgb_like(&x, &y, &params).and_then(|m| m.predict(&x)).map_err(|e| e.to_string())?;
        for (a, b) in gb.iter().zip(&xgb) {
            worst = worst.max((a - b).abs());
        }
    }
    if worst > 1e-9 {
        return Err(format!("max difference {worst:e}"));
    }
    Ok(format!("20 datasets, max difference {worst:e}"))
}

fn worst_gradient_error<T: Network + Clone>(net: &T, x: &[f64], y: &[f64]) -> f64 {
    let step = 1e-5;
    let (_, analytic) = net.loss_and_grad(x, y);
    let mut probe = net.clone();
    let mut worst = 0.0f64;
    for block in net.blocks() {
        for i in block.range {
            let original = probe.params()[i];
            probe.params_mut()[i] = original + step;
            let plus = probe.loss(x, y);
            probe.params_mut()[i] = original - step;
            let minus = probe.loss(x, y);
            probe.params_mut()[i] = original;
            let numeric = (plus - minus) / (2.0 * step);
            let denom = analytic[i].abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((analytic[i] - numeric).abs() / denom);
        }
    }
    worst
}

fn gradient_checks() -> Outcome {
    let start = Instant::now();
    let batch = |samples: usize, width: usize, seed: u64| {
        let mut rng = rng_from_seed(seed);
        let x: Vec<f64> = (0..samples * width).map(|_| rng.random_range(-0.5..1.5)).collect();
        let y: Vec<f64> = (0..samples).map(|_| rng.random_range(-1.0..1.0)).collect();
        (x, y)
    };
    let (x, y) = batch(4, FEATURE_COUNT, 51);
    let mlp = worst_gradient_error(&Mlp::new(FEATURE_COUNT, 8, Activation::Relu, &mut rng_from_seed(50)), &x, &y);
    let (x, y) = batch(4, 3 * FEATURE_COUNT, 53);
    let rnn = worst_gradient_error(&ElmanRnn::new(FEATURE_COUNT, 6, 3, &mut rng_from_seed(52)), &x, &y);
    let lstm = worst_gradient_error(&Lstm::new(FEATURE_COUNT, 5, 3, &mut rng_from_seed(54)), &x, &y);
    let elapsed = start.elapsed();
    let detail = format!("mlp {mlp:.1e}, rnn {rnn:.1e}, lstm {lstm:.1e}, {elapsed:.2?}");
    if mlp.max(rnn).max(lstm) > 1e-4 || elapsed > Duration::from_secs(60) {
        return Err(detail);
    }
    Ok(detail)
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn reduced_config(models: Vec<ModelKind>, horizons: Vec<usize>) -> ExperimentConfig {
    ExperimentConfig {
        models,
        horizons,
        ntrees: vec![50, 100],
        ann_epochs: vec![50, 100],
        ndays: vec![1, 2],
        epoch_scale: 0.5,
        workers: workers(),
        ..ExperimentConfig::default()
    }
}

fn run(config: &ExperimentConfig, series: &OhlcSeries) -> Result<GridOutcome, String> {
    let outcome = run_grid_on(config, series).map_err(|e| e.to_string())?;
    if let Some(f) = outcome.failures.first() {
        return Err(format!("{} h={} failed: {}", f.model, f.horizon, f.message));
    }
    Ok(outcome)
}

fn synthetic_end_to_end() -> Outcome {
    let start = Instant::now();
    let series = generate(&SynthSpec::default());
    let mut models = ModelKind::ALL.iter().copied().filter(|m| m.is_tree()).collect::<Vec<_>>();
    models.push(ModelKind::Lstm);
    let outcome = run(&reduced_config(models, vec![1]), &series)?;
    let r2_of = |m: ModelKind| outcome.records.iter().find(|r| r.model == m).map_or(f64::NAN, |r| r.r2);
    let trees_ok = outcome.records.iter().filter(|r| r.model.is_tree() && r.r2 >= 0.99).count();
    let lstm = r2_of(ModelKind::Lstm);
    let elapsed = start.elapsed();
    let listing: Vec<String> = outcome.records.iter().map(|r| format!("{} {:.4}", r.model, r.r2)).collect();
    let detail = format!("R2 [{}], {trees_ok}/6 trees >= 0.99, {elapsed:.0?}", listing.join(", "));
    if lstm >= 0.99 && trees_ok >= 4 && elapsed < Duration::from_secs(600) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn horizon_degradation() -> Outcome {
    let series = generate(&SynthSpec::default().with_noise(7));
    let outcome = run(&reduced_config(ModelKind::ALL.to_vec(), vec![1, 30]), &series)?;
    let mut lines = Vec::new();
    let mut ok = true;
    for model in ModelKind::ALL {
        let at = |h: usize| outcome.records.iter().find(|r| r.model == model && r.horizon == h).map(|r| r.mape);
        let (Some(short), Some(long)) = (at(1), at(30)) else {
            return Err(format!("{model}: missing horizon"));
        };
        ok &= long >= short;
        lines.push(format!("{model} {short:.2}->{long:.2}"));
    }
    let family = |tree: bool| {
        let rows: Vec<_> = outcome.records.iter().filter(|r| r.model.is_tree() == tree).collect();
        let mean = |h: usize| {
            let v: Vec<f64> = rows.iter().filter(|r| r.horizon == h).map(|r| r.mape).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        (mean(1), mean(30))
    };
    let (t1, t30) = family(true);
    let (n1, n30) = family(false);
    ok &= t30 >= t1 && n30 >= n1;
    let detail = format!("MAPE h1->h30: {}", lines.join(", "));
    if ok { Ok(detail) } else { Err(detail) }
}

fn metric_examples() -> Outcome {
    let checks: [(&str, bool); 12] = [
        ("mape exact", mape(&[100.0, 200.0], &[100.0, 200.0]) == Ok(0.0)),
        ("mape 10%", mape(&[100.0, 200.0], &[110.0, 180.0]) == Ok(10.0)),
        ("mape zero forecast", mape(&[100.0], &[0.0]) == Ok(100.0)),
        ("mape zero actual", mape(&[1.0, 0.0], &[1.0, 1.0]) == Err(Error::UndefinedMape(1))),
        ("mae exact", mae(&[1.0, 3.0], &[1.0, 3.0]) == Ok(0.0)),
        ("mae 1.5", mae(&[1.0, 3.0], &[2.0, 1.0]) == Ok(1.5)),
        ("mae offset", mae(&[101.0, 103.0], &[102.0, 101.0]) == Ok(1.5)),
        ("mae empty", mae(&[], &[]).is_err()),
        ("r2 perfect", r2(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]) == Ok(1.0)),
        ("r2 mean forecast", r2(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]) == Ok(0.0)),
        ("r2 negative", r2(&[1.0, 2.0, 3.0], &[1.0, 2.0, 5.0]) == Ok(-1.0)),
        ("r2 constant actual", r2(&[4.0, 4.0], &[1.0, 2.0]) == Err(Error::UndefinedR2)),
    ];
    if let Some((name, _)) = checks.iter().find(|(_, ok)| !ok) {
        return Err(format!("example `{name}` failed"));
    }
    let mut rng = rng_from_seed(8);
    for _ in 0..200 {
        let n = rng.random_range(2..40);
        let actual: Vec<f64> = (0..n).map(|_| rng.random_range(-100.0..100.0)).collect();
        if r2(&actual, &actual) != Ok(1.0) {
            return Err("perfect forecast without R2 = 1".into());
        }
        let mut off = actual.clone();
        let i = rng.random_range(0..n);
        off[i] += rng.random_range(1e-6..10.0);
        if r2(&actual, &off).map_or(true, |v| v >= 1.0) {
            return Err("imperfect forecast with R2 = 1".into());
        }
    }
    Ok(format!("{} examples, R2 = 1 iff perfect on 200 random cases", checks.len()))
}

fn bench_run(input: &Path, out: &Path, workers: &str) -> Result<Vec<u8>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_bench"))
        .args(["run", "--models", "all", "--horizons", "1,5", "--ntrees", "5,10", "--epochs", "4,8"])
        .args(["--ndays", "1,3", "--epoch-scale", "0.05", "--seed", "2024", "--workers", workers])
        .arg("--input")
        .arg(input)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(format!("bench exited with {}: {}", status.status, String::from_utf8_lossy(&status.stderr)));
    }
    std::fs::read(out.join("report.json")).map_err(|e| e.to_string())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("series.csv");
    let series = generate(&SynthSpec { bars: 400, ..SynthSpec::default() }.with_noise(3));
    let file = std::fs::File::create(&input).map_err(|e| e.to_string())?;
    write_ohlc_csv(&series, file).map_err(|e| e.to_string())?;
    let first = bench_run(&input, &dir.path().join("a"), "1")?;
    let second = bench_run(&input, &dir.path().join("b"), "4")?;
    if first != second {
        return Err("report.json differs between runs".into());
    }
    Ok(format!("{} identical bytes across 1 and 4 workers", first.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("indicator oracle equivalence", indicator_oracle),
        ("algebraic identities", algebraic_identities),
        ("tree split oracle", tree_split_oracle),
        ("boosting equivalence", boosting_equivalence),
        ("gradient checks", gradient_checks),
        ("synthetic end-to-end", synthetic_end_to_end),
        ("horizon degradation", horizon_degradation),
        ("metric unit tests", metric_examples),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        match check() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
