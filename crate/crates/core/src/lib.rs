//! Forecasting primitives for daily index series.
//!
//! The crate turns a chronological OHLC series into ten technical-indicator
//! features, arranges them into horizon-ahead supervised datasets, and fits
//! tree ensembles or small neural regressors on them. Everything here is pure
//! computation over in-memory data; file formats and the experiment runner
//! live in the companion `stockcast-bench` crate.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod dataset;
pub mod error;
pub mod indicators;
pub mod matrix;
pub mod metrics;
pub mod neural;
pub mod rng;
pub mod trees;

pub use error::{Error, Result};
pub use matrix::Matrix;
