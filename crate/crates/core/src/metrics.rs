//! Forecast error measures: MAPE, MAE and the coefficient of determination.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    /// Percent.
    pub mape: f64,
    /// Raw target units.
    pub mae: f64,
    pub r2: f64,
}

fn check_lengths(actual: &[f64], forecast: &[f64], min: usize) -> Result<()> {
    if actual.len() != forecast.len() {
        return Err(Error::LengthMismatch {
            left: actual.len(),
            right: forecast.len(),
        });
    }
    if actual.len() < min {
        return Err(Error::EmptyData);
    }
    Ok(())
}

/// Mean absolute percentage error, `100/n · Σ |(A − F) / A|`.
pub fn mape(actual: &[f64], forecast: &[f64]) -> Result<f64> {
    check_lengths(actual, forecast, 1)?;
    let mut total = 0.0;
    for (i, (&a, &f)) in actual.iter().zip(forecast).enumerate() {
        if a == 0.0 {
            return Err(Error::UndefinedMape(i));
        }
        total += ((a - f) / a).abs();
    }
    Ok(total / actual.len() as f64 * 100.0)
}

pub fn mae(actual: &[f64], forecast: &[f64]) -> Result<f64> {
    check_lengths(actual, forecast, 1)?;
    let total: f64 = actual.iter().zip(forecast).map(|(a, f)| (a - f).abs()).sum();
    Ok(total / actual.len() as f64)
}

/// `1 − SS_res / SS_tot`, with `SS_res` the residual sum of squares.
pub fn r2(actual: &[f64], forecast: &[f64]) -> Result<f64> {
    check_lengths(actual, forecast, 2)?;
    let mean = actual.iter().sum::<f64>() / actual.len() as f64;
    let ss_tot: f64 = actual.iter().map(|a| (a - mean) * (a - mean)).sum();
    if actual.iter().all(|&a| a == actual[0]) || ss_tot == 0.0 {
        return Err(Error::UndefinedR2);
    }
    let ss_res: f64 = actual
        .iter()
        .zip(forecast)
        .map(|(a, f)| (a - f) * (a - f))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

pub fn evaluate(actual: &[f64], forecast: &[f64]) -> Result<EvalResult> {
    Ok(EvalResult {
        mape: mape(actual, forecast)?,
        mae: mae(actual, forecast)?,
        r2: r2(actual, forecast)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mape_examples() {
        assert_eq!(mape(&[100.0, 200.0], &[100.0, 200.0]).unwrap(), 0.0);
        assert_eq!(mape(&[100.0, 200.0], &[110.0, 180.0]).unwrap(), 10.0);
        assert_eq!(mape(&[100.0], &[0.0]).unwrap(), 100.0);
        assert_eq!(mape(&[1.0, 0.0], &[1.0, 1.0]), Err(Error::UndefinedMape(1)));
        assert!(matches!(mape(&[1.0], &[1.0, 2.0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn mae_examples() {
        assert_eq!(mae(&[1.0, 3.0], &[1.0, 3.0]).unwrap(), 0.0);
        assert_eq!(mae(&[1.0, 3.0], &[2.0, 1.0]).unwrap(), 1.5);
        assert_eq!(mae(&[101.0, 103.0], &[102.0, 101.0]).unwrap(), 1.5);
        assert!(mae(&[], &[]).is_err());
    }

    #[test]
    fn r2_examples() {
        assert_eq!(r2(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(r2(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap(), 0.0);
        assert_eq!(r2(&[1.0, 2.0, 3.0], &[1.0, 2.0, 5.0]).unwrap(), -1.0);
        assert_eq!(r2(&[4.0, 4.0], &[1.0, 2.0]), Err(Error::UndefinedR2));
    }
}
