use std::fmt;

use thiserror::Error;

/// One of the four row/column margins of a 2x2 confusion table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Margin {
    /// Predicted positive, `p11 + p10`.
    PredictedPositive,
    /// Predicted negative, `p01 + p00`.
    PredictedNegative,
    /// Truly positive, `p11 + p01`.
    ActualPositive,
    /// Truly negative, `p10 + p00`.
    ActualNegative,
}

impl fmt::Display for Margin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Margin::PredictedPositive => "predicted-positive",
            Margin::PredictedNegative => "predicted-negative",
            Margin::ActualPositive => "actual-positive",
            Margin::ActualNegative => "actual-negative",
        };
        f.write_str(s)
    }
}

/// Which classifier of a paired design an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classifier {
    First,
    Second,
}

impl fmt::Display for Classifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classifier::First => f.write_str("h1"),
            Classifier::Second => f.write_str("h2"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("MCC undefined: {0} margin is zero")]
    MarginZero(Margin),

    #[error("MCC of classifier {classifier} undefined: {margin} margin is zero")]
    PairedMarginZero {
        classifier: Classifier,
        margin: Margin,
    },

    #[error("argument {value} outside the open domain (-{bound}, {bound})")]
    OutOfDomain { value: f64, bound: f64 },

    #[error("probabilities are not a simplex point: {0}")]
    NotSimplex(String),

    #[error("sample size must be at least {min}, got {n}")]
    InvalidN { n: u64, min: u64 },

    #[error("confidence level must lie in (0, 1), got {0}")]
    InvalidLevel(f64),

    #[error("MCC estimator of classifier {0} has zero asymptotic variance")]
    ZeroVariance(Classifier),

    #[error("no probability table attains MCC {target} at prevalence {prevalence}")]
    NoSolution { prevalence: f64, target: f64 },

    #[error("joint table infeasible: cell {cell} would be {value}")]
    Infeasible { cell: &'static str, value: f64 },

    #[error("classifier summaries disagree on prevalence ({0} vs {1})")]
    PrevalenceMismatch(f64, f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("outcome space has {count} tables, above the limit of {limit}")]
    TooLarge { count: u128, limit: u128 },

    #[error("malformed scenario file: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
