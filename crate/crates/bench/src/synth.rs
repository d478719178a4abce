//! Deterministic synthetic index: a linear trend plus two sinusoids, with
//! optional seeded noise. Useful for smoke runs when no market data is at
//! hand.

use std::f64::consts::TAU;

use chrono::{Datelike, NaiveDate, Weekday};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use stockcast_core::indicators::{OhlcBar, OhlcSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Noise {
    pub seed: u64,
    /// Std-dev of the daily random-walk increment, as a fraction of `base`.
    pub walk: f64,
    /// Std-dev of independent multiplicative jitter on each close.
    pub jitter: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub bars: usize,
    pub base: f64,
    pub trend_per_day: f64,
    pub slow: (f64, f64),
    pub fast: (f64, f64),
    pub noise: Option<Noise>,
    pub start: NaiveDate,
}

impl Default for SynthSpec {
    /// About ten years of trading days.
    fn default() -> Self {
        Self {
            bars: 2500,
            base: 1000.0,
            trend_per_day: 0.04,
            slow: (180.0, 250.0),
            fast: (60.0, 45.0),
            noise: None,
            start: NaiveDate::from_ymd_opt(2009, 11, 2).expect("valid date"),
        }
    }
}

impl SynthSpec {
    pub fn with_noise(self, seed: u64) -> Self {
        Self {
            noise: Some(Noise {
                seed,
                walk: 0.006,
                jitter: 0.004,
            }),
            ..self
        }
    }
}

fn next_weekday(mut d: NaiveDate) -> NaiveDate {
    loop {
        d = d.succ_opt().expect("date in range");
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            return d;
        }
    }
}

pub fn generate(spec: &SynthSpec) -> OhlcSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.noise.map_or(0, |n| n.seed));
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let mut walk = 0.0;
    let mut date = spec.start;
    let mut prev_close = None;
    let mut bars = Vec::with_capacity(spec.bars);
    for t in 0..spec.bars {
        let x = t as f64;
        let mut close = spec.base
            + spec.trend_per_day * x
            + spec.slow.0 * (TAU * x / spec.slow.1).sin()
            + spec.fast.0 * (TAU * x / spec.fast.1).sin();
        if let Some(noise) = spec.noise {
            walk += noise.walk * spec.base * unit.sample(&mut rng);
            close = (close + walk) * (1.0 + noise.jitter * unit.sample(&mut rng));
        }
        let close = close.max(1.0);
        let open = prev_close.unwrap_or(close);
        let wick = close * (0.002 + 0.002 * (0.7 * x).sin().abs());
        let high = open.max(close) + wick;
        let low = (open.min(close) - wick).max(0.5);
        bars.push(OhlcBar::new(date, open, high, low, close).expect("synthetic bar is valid"));
        prev_close = Some(close);
        date = next_weekday(date);
    }
    OhlcSeries::new(bars).expect("dates strictly increase")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_valid() {
        let spec = SynthSpec { bars: 300, ..SynthSpec::default() }.with_noise(4);
        let a = generate(&spec);
        assert_eq!(a, generate(&spec));
        assert_eq!(a.len(), 300);
        assert_ne!(a, generate(&spec.with_noise(5)));
        assert!(a.bars().iter().all(|b| !matches!(b.date.weekday(), Weekday::Sat | Weekday::Sun)));
    }
}
