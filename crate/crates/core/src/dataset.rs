//! Supervised datasets built from an indicator matrix.
//!
//! Features are min-max scaled per column with parameters fitted on the
//! training slice only. Targets stay in raw index units. Samples are never
//! shuffled across the train/test boundary.

use alloc::vec::Vec;
use core::ops::Range;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::indicators::IndicatorMatrix;
use crate::matrix::Matrix;

/// Normalized test values are clamped into this interval.
pub const CLAMP_RANGE: (f64, f64) = (-0.5, 1.5);
pub const DEFAULT_TRAIN_RATIO: f64 = 0.8;

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub fitted_on: Range<usize>,
}

pub fn fit_normalizer(features: &Matrix, train_range: Range<usize>) -> Result<NormalizationParams> {
    if train_range.is_empty() {
        return Err(Error::EmptyRange);
    }
    if train_range.end > features.rows() {
        return Err(Error::RangeOutOfBounds {
            start: train_range.start,
            end: train_range.end,
            len: features.rows(),
        });
    }
    let cols = features.cols();
    let mut min = alloc::vec![f64::INFINITY; cols];
    let mut max = alloc::vec![f64::NEG_INFINITY; cols];
    for i in train_range.clone() {
        for (j, &x) in features.row(i).iter().enumerate() {
            min[j] = min[j].min(x);
            max[j] = max[j].max(x);
        }
    }
    Ok(NormalizationParams {
        min,
        max,
        fitted_on: train_range,
    })
}

impl NormalizationParams {
    pub fn n_features(&self) -> usize {
        self.min.len()
    }

    #[inline]
    pub fn scale_value(&self, j: usize, x: f64) -> f64 {
        let span = self.max[j] - self.min[j];
        if span == 0.0 {
            return 0.0;
        }
        ((x - self.min[j]) / span).clamp(CLAMP_RANGE.0, CLAMP_RANGE.1)
    }

    /// Scales a flat buffer of consecutive feature rows in place.
    pub fn scale_rows_in_place(&self, rows: &mut [f64]) -> Result<()> {
        let cols = self.n_features();
        if cols == 0 || rows.len() % cols != 0 {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: rows.len(),
            });
        }
        for row in rows.chunks_exact_mut(cols) {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.scale_value(j, *x);
            }
        }
        Ok(())
    }

    /// Undoes the affine map (clamping is not invertible; constant columns
    /// come back as their minimum).
    pub fn invert(&self, normalized: &Matrix) -> Result<Matrix> {
        self.check_cols(normalized)?;
        let mut out = normalized.clone();
        for i in 0..out.rows() {
            for (j, x) in out.row_mut(i).iter_mut().enumerate() {
                *x = *x * (self.max[j] - self.min[j]) + self.min[j];
            }
        }
        Ok(out)
    }

    fn check_cols(&self, m: &Matrix) -> Result<()> {
        if m.cols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                found: m.cols(),
            });
        }
        Ok(())
    }
}

/// `(x − min) / (max − min)`, clamped to [`CLAMP_RANGE`]; constant columns map to 0.
pub fn apply_normalizer(features: &Matrix, params: &NormalizationParams) -> Result<Matrix> {
    params.check_cols(features)?;
    let mut out = features.clone();
    params.scale_rows_in_place(out.as_mut_slice())?;
    Ok(out)
}

/// Feature rows paired with the index value `horizon` rows later.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedSet {
    pub features: Matrix,
    pub targets: Vec<f64>,
    pub horizon: usize,
    /// Date of each feature row.
    pub dates: Vec<NaiveDate>,
}

/// Lookback windows of `ndays` consecutive feature rows, flattened as
/// `samples × ndays × n_features`.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSet {
    pub windows: Vec<f64>,
    pub targets: Vec<f64>,
    pub ndays: usize,
    pub n_features: usize,
    pub horizon: usize,
    /// Date of the last row of each window.
    pub dates: Vec<NaiveDate>,
}

impl SequenceSet {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn window_len(&self) -> usize {
        self.ndays * self.n_features
    }

    pub fn window(&self, i: usize) -> &[f64] {
        let w = self.window_len();
        &self.windows[i * w..(i + 1) * w]
    }

    pub fn normalized(&self, params: &NormalizationParams) -> Result<Self> {
        if params.n_features() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                found: params.n_features(),
            });
        }
        let mut out = self.clone();
        if !out.windows.is_empty() {
            params.scale_rows_in_place(&mut out.windows)?;
        }
        Ok(out)
    }
}

impl SupervisedSet {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn normalized(&self, params: &NormalizationParams) -> Result<Self> {
        Ok(Self {
            features: apply_normalizer(&self.features, params)?,
            ..self.clone()
        })
    }
}

fn check_index(matrix: &IndicatorMatrix, index: &[f64]) -> Result<()> {
    if index.len() != matrix.len() {
        return Err(Error::LengthMismatch {
            left: matrix.len(),
            right: index.len(),
        });
    }
    Ok(())
}

/// Pairs each usable feature row `t` with `index[t + horizon]`.
pub fn make_supervised(matrix: &IndicatorMatrix, index: &[f64], horizon: usize) -> Result<SupervisedSet> {
    check_index(matrix, index)?;
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1"));
    }
    let usable = matrix.usable_len();
    if horizon >= usable {
        return Err(Error::HorizonTooLong { horizon, usable });
    }
    let samples = usable - horizon;
    let start = matrix.valid_from();
    let features = matrix.usable_features().slice_rows(0..samples)?;
    let targets = index[start + horizon..start + horizon + samples].to_vec();
    let dates = matrix.usable_dates()[..samples].to_vec();
    Ok(SupervisedSet {
        features,
        targets,
        horizon,
        dates,
    })
}

/// Sliding windows of `ndays` rows; the target is `horizon` rows after the
/// window's last row.
pub fn make_sequences(
    matrix: &IndicatorMatrix,
    index: &[f64],
    horizon: usize,
    ndays: usize,
) -> Result<SequenceSet> {
    check_index(matrix, index)?;
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1"));
    }
    if ndays == 0 {
        return Err(Error::InvalidParameter("ndays must be at least 1"));
    }
    let usable = matrix.usable_len();
    let needed = horizon + ndays;
    if usable < needed {
        return Err(Error::InsufficientLength { needed, usable });
    }
    let samples = usable - horizon - ndays + 1;
    let rows = matrix.usable_features();
    let n_features = rows.cols();
    let start = matrix.valid_from();

    let mut windows = Vec::with_capacity(samples * ndays * n_features);
    let mut targets = Vec::with_capacity(samples);
    let mut dates = Vec::with_capacity(samples);
    for j in 0..samples {
        let anchor = j + ndays - 1;
        windows.extend_from_slice(&rows.as_slice()[j * n_features..(anchor + 1) * n_features]);
        targets.push(index[start + anchor + horizon]);
        dates.push(matrix.usable_dates()[anchor]);
    }
    Ok(SequenceSet {
        windows,
        targets,
        ndays,
        n_features,
        horizon,
        dates,
    })
}

/// Number of leading samples assigned to training: `⌈ratio · n⌉`.
pub fn split_point(n: usize, train_ratio: f64) -> Result<usize> {
    if !(train_ratio > 0.0 && train_ratio < 1.0) {
        return Err(Error::InvalidRatio(train_ratio));
    }
    let exact = train_ratio * n as f64;
    let nearest = libm::round(exact);
    // absorb representation error such as 0.7 · 10 = 7.000000000000001
    let cut = if (exact - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        libm::ceil(exact)
    };
    Ok(cut as usize)
}

/// Datasets whose samples are in time order and can be cut into contiguous
/// blocks.
pub trait Chronological: Sized {
    fn sample_count(&self) -> usize;
    fn take(&self, range: Range<usize>) -> Self;
}

impl Chronological for SupervisedSet {
    fn sample_count(&self) -> usize {
        self.len()
    }

    fn take(&self, range: Range<usize>) -> Self {
        Self {
            features: self.features.slice_rows(range.clone()).expect("range within set"),
            targets: self.targets[range.clone()].to_vec(),
            horizon: self.horizon,
            dates: self.dates[range].to_vec(),
        }
    }
}

impl Chronological for SequenceSet {
    fn sample_count(&self) -> usize {
        self.len()
    }

    fn take(&self, range: Range<usize>) -> Self {
        let w = self.window_len();
        Self {
            windows: self.windows[range.start * w..range.end * w].to_vec(),
            targets: self.targets[range.clone()].to_vec(),
            ndays: self.ndays,
            n_features: self.n_features,
            horizon: self.horizon,
            dates: self.dates[range].to_vec(),
        }
    }
}

/// Earliest `⌈ratio · N⌉` samples train, the rest test. Both halves must be
/// non-empty.
pub fn chronological_split<S: Chronological>(set: &S, train_ratio: f64) -> Result<(S, S)> {
    let n = set.sample_count();
    let cut = split_point(n, train_ratio)?;
    if cut == 0 || cut >= n {
        return Err(Error::InsufficientLength { needed: 2, usable: n });
    }
    Ok((set.take(0..cut), set.take(cut..n)))
}

/// A normalized chronological split ready for model fitting.
#[derive(Debug, Clone)]
pub struct PreparedSplit<S> {
    pub train: S,
    pub test: S,
    pub params: NormalizationParams,
}

/// Builds the tabular dataset for `horizon`, splits it, and scales features
/// with parameters fitted on the training rows.
pub fn prepare_tabular(
    matrix: &IndicatorMatrix,
    index: &[f64],
    horizon: usize,
    train_ratio: f64,
) -> Result<PreparedSplit<SupervisedSet>> {
    let set = make_supervised(matrix, index, horizon)?;
    let (train, test) = chronological_split(&set, train_ratio)?;
    let params = fit_normalizer(&set.features, 0..train.len())?;
    Ok(PreparedSplit {
        train: train.normalized(&params)?,
        test: test.normalized(&params)?,
        params,
    })
}

/// Sequence counterpart of [`prepare_tabular`]. The scaler is fitted on
/// every usable row that appears in a training window.
pub fn prepare_sequences(
    matrix: &IndicatorMatrix,
    index: &[f64],
    horizon: usize,
    ndays: usize,
    train_ratio: f64,
) -> Result<PreparedSplit<SequenceSet>> {
    let set = make_sequences(matrix, index, horizon, ndays)?;
    let (train, test) = chronological_split(&set, train_ratio)?;
    let rows = matrix.usable_features();
    let params = fit_normalizer(&rows, 0..train.len() + ndays - 1)?;
    Ok(PreparedSplit {
        train: train.normalized(&params)?,
        test: test.normalized(&params)?,
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn fit_examples() {
        let m = Matrix::from_rows(2, &[[7.0, 0.0], [7.0, 10.0], [7.0, 99.0]]).unwrap();
        let p = fit_normalizer(&m, 0..2).unwrap();
        assert_eq!(p.min, vec![7.0, 0.0]);
        assert_eq!(p.max, vec![7.0, 10.0]);
        assert_eq!(fit_normalizer(&m, 1..1), Err(Error::EmptyRange));
    }

    #[test]
    fn apply_examples() {
        let train = Matrix::from_rows(2, &[[2.0, 5.0], [6.0, 5.0]]).unwrap();
        let p = fit_normalizer(&train, 0..2).unwrap();
        let x = Matrix::from_rows(2, &[[2.0, 5.0], [6.0, 1.0], [-2.0, 9.0], [30.0, 5.0]]).unwrap();
        let y = apply_normalizer(&x, &p).unwrap();
        assert_eq!(y.row(0), &[0.0, 0.0]);
        assert_eq!(y.row(1), &[1.0, 0.0]);
        // min − (max − min) lands exactly on the lower clamp
        assert_eq!(y.row(2), &[-0.5, 0.0]);
        assert_eq!(y.row(3), &[1.5, 0.0]);
    }

    #[test]
    fn split_counts() {
        assert_eq!(split_point(10, 0.8).unwrap(), 8);
        assert_eq!(split_point(7, 0.5).unwrap(), 4);
        assert_eq!(split_point(10, 0.7).unwrap(), 7);
        assert!(split_point(10, 1.0).is_err());
        assert!(split_point(10, 0.0).is_err());
        assert!(split_point(10, f64::NAN).is_err());
    }
}
