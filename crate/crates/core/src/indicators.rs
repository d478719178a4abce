//! Technical indicators over a daily OHLC series.
//!
//! Every windowed indicator returns one entry per input bar, `None` until
//! enough history exists. Degenerate windows (flat prices) resolve to the
//! neutral midpoint of the indicator's range instead of producing NaN.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Look-back window used by every indicator in the feature set.
pub const DEFAULT_WINDOW: usize = 10;
pub const FEATURE_COUNT: usize = 10;
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "sma",
    "wma",
    "momentum",
    "stoch_k",
    "stoch_d",
    "rsi",
    "macd_signal",
    "williams_r",
    "ad_osc",
    "cci",
];

pub const MACD_FAST: usize = 12;
pub const MACD_SLOW: usize = 26;
pub const CCI_SCALE: f64 = 0.015;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OhlcBar {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
}

impl OhlcBar {
    pub fn new(date: NaiveDate, open: f64, high: f64, low: f64, close: f64) -> Result<Self> {
        let bar = Self {
            date,
            open,
            high,
            low,
            close,
        };
        bar.validate()?;
        Ok(bar)
    }

    pub fn validate(&self) -> Result<()> {
        let reason = if ![self.open, self.high, self.low, self.close]
            .iter()
            .all(|p| p.is_finite() && *p > 0.0)
        {
            Some("prices must be finite and strictly positive")
        } else if self.low > self.high {
            Some("high below low")
        } else if self.open < self.low || self.open > self.high {
            Some("open outside [low, high]")
        } else if self.close < self.low || self.close > self.high {
            Some("close outside [low, high]")
        } else {
            None
        };
        match reason {
            Some(reason) => Err(Error::InvalidBar {
                date: format!("{}", self.date),
                reason,
            }),
            None => Ok(()),
        }
    }

    /// `(high + low + close) / 3`, the CCI input.
    pub fn typical_price(&self) -> f64 {
        (self.high + self.low + self.close) / 3.0
    }
}

/// Bars in strictly increasing date order.
#[derive(Debug, Clone, PartialEq)]
pub struct OhlcSeries {
    bars: Vec<OhlcBar>,
}

impl OhlcSeries {
    pub fn new(bars: Vec<OhlcBar>) -> Result<Self> {
        for bar in &bars {
            bar.validate()?;
        }
        for pair in bars.windows(2) {
            if pair[1].date <= pair[0].date {
                return Err(Error::UnorderedDates {
                    date: format!("{}", pair[1].date),
                });
            }
        }
        Ok(Self { bars })
    }

    pub fn bars(&self) -> &[OhlcBar] {
        &self.bars
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.bars.iter().map(|b| b.date).collect()
    }

    pub fn closes(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.close).collect()
    }

    pub fn highs(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.high).collect()
    }

    pub fn lows(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.low).collect()
    }

    /// Multiplies every price by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let bars = self
            .bars
            .iter()
            .map(|b| OhlcBar {
                date: b.date,
                open: b.open * factor,
                high: b.high * factor,
                low: b.low * factor,
                close: b.close * factor,
            })
            .collect();
        Self::new(bars)
    }
}

/// One day's feature vector, in [`FEATURE_NAMES`] order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IndicatorVector {
    pub sma: f64,
    pub wma: f64,
    pub momentum: f64,
    pub stoch_k: f64,
    pub stoch_d: f64,
    pub rsi: f64,
    pub macd_signal: f64,
    pub williams_r: f64,
    pub ad_osc: f64,
    pub cci: f64,
}

impl IndicatorVector {
    pub fn to_array(&self) -> [f64; FEATURE_COUNT] {
        [
            self.sma,
            self.wma,
            self.momentum,
            self.stoch_k,
            self.stoch_d,
            self.rsi,
            self.macd_signal,
            self.williams_r,
            self.ad_osc,
            self.cci,
        ]
    }

    pub fn from_array(v: [f64; FEATURE_COUNT]) -> Self {
        Self {
            sma: v[0],
            wma: v[1],
            momentum: v[2],
            stoch_k: v[3],
            stoch_d: v[4],
            rsi: v[5],
            macd_signal: v[6],
            williams_r: v[7],
            ad_osc: v[8],
            cci: v[9],
        }
    }
}

/// Per-day indicator rows aligned with the input bars.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorMatrix {
    dates: Vec<NaiveDate>,
    rows: Vec<Option<IndicatorVector>>,
    valid_from: usize,
    window: usize,
}

impl IndicatorMatrix {
    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    /// `None` for every row before [`valid_from`](Self::valid_from).
    pub fn rows(&self) -> &[Option<IndicatorVector>] {
        &self.rows
    }

    pub fn valid_from(&self) -> usize {
        self.valid_from
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Number of rows with every indicator defined.
    pub fn usable_len(&self) -> usize {
        self.rows.len() - self.valid_from
    }

    pub fn usable_dates(&self) -> &[NaiveDate] {
        &self.dates[self.valid_from..]
    }

    /// Raw (unnormalized) features of the usable rows, `usable_len × 10`.
    pub fn usable_features(&self) -> Matrix {
        let rows: Vec<[f64; FEATURE_COUNT]> = self.rows[self.valid_from..]
            .iter()
            .map(|r| r.expect("rows after valid_from are defined").to_array())
            .collect();
        Matrix::from_rows(FEATURE_COUNT, &rows).expect("fixed width rows")
    }
}

fn check_period(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidPeriod(n))
    } else {
        Ok(())
    }
}

fn check_same_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        })
    } else {
        Ok(())
    }
}

/// Exponential moving average with smoothing `2 / (k + 1)`, seeded with the
/// first value.
pub fn ema(closes: &[f64], k: usize) -> Result<Vec<f64>> {
    if closes.is_empty() {
        return Err(Error::EmptySeries);
    }
    check_period(k)?;
    let alpha = 2.0 / (k as f64 + 1.0);
    let mut out = Vec::with_capacity(closes.len());
    let mut current = closes[0];
    out.push(current);
    for &c in &closes[1..] {
        current = current * (1.0 - alpha) + c * alpha;
        out.push(current);
    }
    Ok(out)
}

/// Applies `f` to each full window of `n` values ending at `t`.
fn windowed<T: Copy>(values: &[T], n: usize, mut f: impl FnMut(&[T]) -> f64) -> Vec<Option<f64>> {
    (0..values.len())
        .map(|t| (t + 1 >= n).then(|| f(&values[t + 1 - n..=t])))
        .collect()
}

pub fn sma(values: &[f64], n: usize) -> Result<Vec<Option<f64>>> {
    check_period(n)?;
    Ok(windowed(values, n, |w| w.iter().sum::<f64>() / n as f64))
}

/// Linearly weighted moving average: weight `n` on the newest close down to
/// weight 1 on the oldest.
pub fn wma(closes: &[f64], n: usize) -> Result<Vec<Option<f64>>> {
    check_period(n)?;
    let denom = (n * (n + 1)) as f64 / 2.0;
    Ok(windowed(closes, n, |w| {
        w.iter()
            .enumerate()
            .map(|(i, c)| (i + 1) as f64 * c)
            .sum::<f64>()
            / denom
    }))
}

/// `C_t − C_{t−n+1}`.
pub fn momentum(closes: &[f64], n: usize) -> Result<Vec<Option<f64>>> {
    check_period(n)?;
    Ok(windowed(closes, n, |w| w[n - 1] - w[0]))
}

fn highest_lowest(highs: &[f64], lows: &[f64]) -> (f64, f64) {
    let hh = highs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ll = lows.iter().copied().fold(f64::INFINITY, f64::min);
    (hh, ll)
}

fn range_position(
    highs: &[f64],
    lows: &[f64],
    closes: &[f64],
    n: usize,
    score: impl Fn(f64, f64, f64) -> f64,
) -> Result<Vec<Option<f64>>> {
    check_period(n)?;
    check_same_len(highs, closes)?;
    check_same_len(lows, closes)?;
    Ok((0..closes.len())
        .map(|t| {
            (t + 1 >= n).then(|| {
                let (hh, ll) = highest_lowest(&highs[t + 1 - n..=t], &lows[t + 1 - n..=t]);
                if hh == ll {
                    50.0
                } else {
                    score(closes[t], hh, ll)
                }
            })
        })
        .collect())
}

/// Stochastic %K: position of the close inside the `n`-day high/low range.
pub fn stochastic_k(highs: &[f64], lows: &[f64], closes: &[f64], n: usize) -> Result<Vec<Option<f64>>> {
    range_position(highs, lows, closes, n, |c, hh, ll| (c - ll) / (hh - ll) * 100.0)
}

/// Stochastic %D: mean of the last `n` defined %K values.
pub fn stochastic_d(stoch_k: &[Option<f64>], n: usize) -> Result<Vec<Option<f64>>> {
    check_period(n)?;
    Ok((0..stoch_k.len())
        .map(|t| {
            if t + 1 < n {
                return None;
            }
            let window = &stoch_k[t + 1 - n..=t];
            if window.iter().any(Option::is_none) {
                return None;
            }
            Some(window.iter().map(|k| k.unwrap()).sum::<f64>() / n as f64)
        })
        .collect())
}

/// Larry Williams %R: distance of the close below the `n`-day high.
pub fn williams_r(highs: &[f64], lows: &[f64], closes: &[f64], n: usize) -> Result<Vec<Option<f64>>> {
    range_position(highs, lows, closes, n, |c, hh, ll| (hh - c) / (hh - ll) * 100.0)
}

/// RSI over the last `n` close-to-close changes, defined from index `n`.
pub fn rsi(closes: &[f64], n: usize) -> Result<Vec<Option<f64>>> {
    check_period(n)?;
    if closes.len() < n + 1 {
        return Err(Error::SeriesTooShort {
            required: n + 1,
            actual: closes.len(),
        });
    }
    let mut out = vec![None; closes.len()];
    for (t, slot) in out.iter_mut().enumerate().skip(n) {
        let (mut up, mut down) = (0.0, 0.0);
        for s in t + 1 - n..=t {
            let change = closes[s] - closes[s - 1];
            if change > 0.0 {
                up += change;
            } else {
                down -= change;
            }
        }
        *slot = Some(rsi_from_sums(up, down));
    }
    Ok(out)
}

fn rsi_from_sums(up: f64, down: f64) -> f64 {
    match (up == 0.0, down == 0.0) {
        (true, true) => 50.0,
        (_, true) => 100.0,
        (true, false) => 0.0,
        (false, false) => 100.0 - 100.0 / (1.0 + up / down),
    }
}

/// `EMA(12) − EMA(26)` of the closes.
pub fn macd(closes: &[f64]) -> Result<Vec<f64>> {
    let fast = ema(closes, MACD_FAST)?;
    let slow = ema(closes, MACD_SLOW)?;
    Ok(fast.iter().zip(&slow).map(|(f, s)| f - s).collect())
}

/// Exponential smoothing of MACD with period `n`, seeded with `MACD_0`.
pub fn macd_signal(closes: &[f64], n: usize) -> Result<Vec<f64>> {
    ema(&macd(closes)?, n)
}

/// `(H_t − C_t) / (H_t − L_t)`; 0.5 on a zero-range bar.
pub fn ad_oscillator(highs: &[f64], lows: &[f64], closes: &[f64]) -> Result<Vec<f64>> {
    check_same_len(highs, closes)?;
    check_same_len(lows, closes)?;
    Ok(closes
        .iter()
        .zip(highs.iter().zip(lows))
        .map(|(&c, (&h, &l))| if h == l { 0.5 } else { (h - c) / (h - l) })
        .collect())
}

pub fn typical_price(highs: &[f64], lows: &[f64], closes: &[f64]) -> Result<Vec<f64>> {
    check_same_len(highs, closes)?;
    check_same_len(lows, closes)?;
    Ok(closes
        .iter()
        .zip(highs.iter().zip(lows))
        .map(|(&c, (&h, &l))| (h + l + c) / 3.0)
        .collect())
}

/// Commodity channel index `(M_t − SM_t) / (0.015 · D_t)` with `D_t` the
/// mean absolute deviation of the typical price about its `n`-day mean.
/// A window of identical typical prices yields 0.
pub fn cci(highs: &[f64], lows: &[f64], closes: &[f64], n: usize) -> Result<Vec<Option<f64>>> {
    check_period(n)?;
    let typical = typical_price(highs, lows, closes)?;
    Ok(windowed(&typical, n, |w| {
        if w.iter().all(|&m| m == w[0]) {
            return 0.0;
        }
        let mean = w.iter().sum::<f64>() / n as f64;
        let deviation = w.iter().map(|m| (m - mean).abs()).sum::<f64>() / n as f64;
        (w[n - 1] - mean) / (CCI_SCALE * deviation)
    }))
}

/// Smallest series length accepted by [`compute_indicator_matrix`].
pub fn min_series_len(n: usize) -> usize {
    2 * n + MACD_SLOW
}

/// First index at which all ten indicators are defined.
///
/// The MACD signal is a recurrence and exists from day 0, but it is only
/// treated as warmed up once the slow EMA has seen `MACD_SLOW` closes and the
/// signal line has then seen `n` MACD values.
pub fn first_valid_index(n: usize) -> usize {
    let stoch_d_start = 2 * n - 2;
    let rsi_start = n;
    let signal_start = (MACD_SLOW - 1) + (n - 1);
    stoch_d_start.max(rsi_start).max(signal_start)
}

pub fn compute_indicator_matrix(series: &OhlcSeries, n: usize) -> Result<IndicatorMatrix> {
    check_period(n)?;
    let required = min_series_len(n);
    if series.len() < required {
        return Err(Error::SeriesTooShort {
            required,
            actual: series.len(),
        });
    }
    let closes = series.closes();
    let highs = series.highs();
    let lows = series.lows();

    let sma = sma(&closes, n)?;
    let wma = wma(&closes, n)?;
    let momentum = momentum(&closes, n)?;
    let stoch_k = stochastic_k(&highs, &lows, &closes, n)?;
    let stoch_d = stochastic_d(&stoch_k, n)?;
    let rsi = rsi(&closes, n)?;
    let signal = macd_signal(&closes, n)?;
    let williams = williams_r(&highs, &lows, &closes, n)?;
    let ad = ad_oscillator(&highs, &lows, &closes)?;
    let cci = cci(&highs, &lows, &closes, n)?;

    let valid_from = first_valid_index(n);
    let rows = (0..series.len())
        .map(|t| {
            if t < valid_from {
                return None;
            }
            Some(IndicatorVector {
                sma: sma[t]?,
                wma: wma[t]?,
                momentum: momentum[t]?,
                stoch_k: stoch_k[t]?,
                stoch_d: stoch_d[t]?,
                rsi: rsi[t]?,
                macd_signal: signal[t],
                williams_r: williams[t]?,
                ad_osc: ad[t],
                cci: cci[t]?,
            })
        })
        .collect::<Vec<_>>();
    debug_assert!(rows[valid_from..].iter().all(Option::is_some));

    Ok(IndicatorMatrix {
        dates: series.dates(),
        rows,
        valid_from,
        window: n,
    })
}
