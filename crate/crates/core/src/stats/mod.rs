//! Hypothesis tests used to order aggregated classes by report volume.
//!
//! All p-values come from [`special`]: the regularized incomplete beta for
//! Student's t, the closed-form chi-square(2) tail for the normality test, and
//! the Kolmogorov series for the two-sample KS test. No multiple-comparison
//! correction is applied anywhere.

mod ks;
mod normality;
mod order;
pub mod special;
mod welch;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::taxonomy::AggregatedClass;

pub use ks::ks_two_sample;
pub use normality::{dagostino_pearson, DAGOSTINO_MIN_N};
pub use order::{derive_partial_order, OrderEdge, PairComparison, PartialOrder, Strength};
pub use welch::welch_t;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("need at least {needed} observations per sample, got {got}")]
    InsufficientSample { needed: usize, got: usize },
    #[error("both samples have zero variance and equal means")]
    DegenerateVariance,
    #[error("sample of {n} is below the minimum of {minimum}")]
    SampleTooSmall { n: usize, minimum: usize },
    #[error("sample has zero variance")]
    DegenerateSample,
    #[error("empty sample")]
    EmptySample,
    #[error("sample contains a non-finite value")]
    NonFinite,
    #[error("significance levels must satisfy 0 < strong <= weak < 1, got {strong} and {weak}")]
    InvalidAlpha { strong: f64, weak: f64 },
    #[error("significant order is cyclic through {cycle:?} (p-values {p_values:?})")]
    CyclicOrder { cycle: Vec<AggregatedClass>, p_values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    Greater,
    Less,
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Welch-Satterthwaite degrees of freedom, when the test has any.
    pub df: Option<f64>,
    pub alternative: Alternative,
}

fn check_finite(xs: &[f64]) -> Result<(), StatsError> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(StatsError::NonFinite)
    }
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance, two-pass.
pub(crate) fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}
