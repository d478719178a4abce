//! `date,open,high,low,close` files.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::Deserialize;
use stockcast_core::indicators::{OhlcBar, OhlcSeries};

use crate::error::{BenchError, Result};

pub const HEADER: [&str; 5] = ["date", "open", "high", "low", "close"];

#[derive(Debug, Deserialize)]
struct Row {
    date: NaiveDate,
    open: f64,
    high: f64,
    low: f64,
    close: f64,
}

pub fn load_ohlc_csv(path: &Path) -> Result<OhlcSeries> {
    let file = std::fs::File::open(path).map_err(|e| BenchError::Io(path.to_path_buf(), e))?;
    parse_ohlc_csv(file, path)
}

/// Parses, validates and sorts bars by date. `origin` only labels errors.
pub fn parse_ohlc_csv<R: Read>(reader: R, origin: &Path) -> Result<OhlcSeries> {
    let row_error = |line: u64, message: String| BenchError::Row {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| row_error(1, e.to_string()))?;
    if header.iter().map(str::to_ascii_lowercase).ne(HEADER.iter().map(|s| s.to_string())) {
        return Err(row_error(1, format!("expected header `{}`", HEADER.join(","))));
    }

    let mut bars = Vec::new();
    let mut seen = HashSet::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            row_error(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row: Row = record
            .deserialize(Some(&csv::StringRecord::from(HEADER.to_vec())))
            .map_err(|e| row_error(line, format!("malformed row: {e}")))?;
        if !seen.insert(row.date) {
            return Err(row_error(line, format!("duplicate date {}", row.date)));
        }
        let bar = OhlcBar::new(row.date, row.open, row.high, row.low, row.close)
            .map_err(|e| row_error(line, e.to_string()))?;
        bars.push(bar);
    }
    bars.sort_by_key(|b| b.date);
    OhlcSeries::new(bars).map_err(|e| BenchError::Data {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn write_ohlc_csv<W: Write>(series: &OhlcSeries, writer: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HEADER)?;
    for b in series.bars() {
        w.write_record([
            b.date.to_string(),
            format!("{:.6}", b.open),
            format!("{:.6}", b.high),
            format!("{:.6}", b.low),
            format!("{:.6}", b.close),
        ])?;
    }
    w.flush()
}
