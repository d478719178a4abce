#![allow(dead_code)]

use chrono::NaiveDate;
use rand::Rng;
use stockcast_core::indicators::{OhlcBar, OhlcSeries};
use stockcast_core::rng::rng_from_seed;

/// Random-walk OHLC series with valid bars.
pub fn random_series(len: usize, seed: u64) -> OhlcSeries {
    let mut rng = rng_from_seed(seed);
    let start = NaiveDate::from_ymd_opt(2009, 11, 1).unwrap();
    let mut close: f64 = rng.random_range(50.0..500.0);
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

/// `|a − b| ≤ tol · max(|b|, 1)`.
pub fn close_to(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}
