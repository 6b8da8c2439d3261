use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is not a probability in [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("flip probability f = {f} exceeds 1 - d = {}", 1.0 - .d)]
    FlipExceedsSurvival { d: f64, f: f64 },

    #[error("mixture weights sum to {0}, expected 1")]
    WeightSum(f64),

    #[error("a concatenation needs at least one component")]
    EmptyConcatenation,

    #[error("expected {expected} components, got {got}")]
    ComponentCount { expected: usize, got: usize },

    #[error("blocklength {n} exceeds the enumeration limit {max}")]
    BlocklengthTooLarge { n: usize, max: usize },

    #[error("blocklength mismatch: {0} vs {1}")]
    BlocklengthMismatch(usize, usize),

    #[error("input distribution: {0}")]
    InvalidDistribution(String),

    #[error("bit string: {0}")]
    InvalidBitString(String),

    #[error("scale rule only extends toward d = 1 (from {from} to {to})")]
    ScaleDirection { from: f64, to: f64 },

    #[error("bound curve: {0}")]
    InvalidCurve(String),

    #[error("grid: {0}")]
    InvalidGrid(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Rejects anything outside `[0, 1]`, NaN included.
pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::InvalidProbability { name, value })
    }
}
