use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty series")]
    EmptySeries,
    #[error("invalid period {0}")]
    InvalidPeriod(usize),
    #[error("series too short: need at least {required} bars, got {actual}")]
    SeriesTooShort { required: usize, actual: usize },
    #[error("invalid bar on {date}: {reason}")]
    InvalidBar { date: String, reason: &'static str },
    #[error("bars not strictly increasing by date at {date}")]
    UnorderedDates { date: String },
    #[error("empty range")]
    EmptyRange,
    #[error("range {start}..{end} out of bounds for {len} rows")]
    RangeOutOfBounds { start: usize, end: usize, len: usize },
    #[error("horizon {horizon} leaves no samples from {usable} usable days")]
    HorizonTooLong { horizon: usize, usable: usize },
    #[error("insufficient length: {needed} usable days needed, {usable} available")]
    InsufficientLength { needed: usize, usable: usize },
    #[error("train ratio {0} outside (0, 1)")]
    InvalidRatio(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("empty data")]
    EmptyData,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("degenerate weighting")]
    DegenerateWeighting,
    #[error("divergence: non-finite loss at epoch {epoch}")]
    Divergence { epoch: usize },
    #[error("undefined MAPE: actual value is zero at position {0}")]
    UndefinedMape(usize),
    #[error("undefined R²: actual values are constant")]
    UndefinedR2,
}
