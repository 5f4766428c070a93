//! Node impurity functions for regression targets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Split quality criterion. All four measure how concentrated a node's
/// targets are; Gini is deliberately absent because it is undefined for
/// regression targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// Population variance.
    SquaredError,
    /// Variance as node impurity; split *scoring* uses Friedman's
    /// between-child improvement instead of plain variance reduction.
    FriedmanMse,
    /// Mean absolute deviation from the node median.
    AbsoluteError,
    /// Mean half Poisson deviance against the node mean; requires
    /// non-negative targets.
    Poisson,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [
        Criterion::SquaredError,
        Criterion::FriedmanMse,
        Criterion::AbsoluteError,
        Criterion::Poisson,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::SquaredError => "squared_error",
            Criterion::FriedmanMse => "friedman_mse",
            Criterion::AbsoluteError => "absolute_error",
            Criterion::Poisson => "poisson",
        }
    }
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Impurity of a set of targets under `criterion`. Non-negative, and zero
/// exactly when all targets are equal.
pub fn impurity(targets: &[f64], criterion: Criterion) -> Result<f64> {
    if targets.is_empty() {
        return Err(Error::Domain(
            "impurity of an empty target set is undefined".into(),
        ));
    }
    if let Some(bad) = targets.iter().find(|y| !y.is_finite()) {
        return Err(Error::Domain(format!("non-finite target {bad}")));
    }
    let n = targets.len() as f64;
    match criterion {
        Criterion::SquaredError | Criterion::FriedmanMse => {
            let mean = targets.iter().sum::<f64>() / n;
            Ok(targets.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n)
        }
        Criterion::AbsoluteError => {
            let m = median(targets);
            Ok(targets.iter().map(|y| (y - m).abs()).sum::<f64>() / n)
        }
        Criterion::Poisson => {
            if let Some(bad) = targets.iter().find(|y| **y < 0.0) {
                return Err(Error::Domain(format!(
                    "Poisson impurity requires non-negative targets, got {bad}"
                )));
            }
            let mean = targets.iter().sum::<f64>() / n;
            if mean == 0.0 {
                return Ok(0.0); // all targets are exactly zero
            }
            let dev = targets
                .iter()
                .map(|&y| {
                    let ylog = if y > 0.0 { y * (y / mean).ln() } else { 0.0 };
                    ylog - y + mean
                })
                .sum::<f64>();
            Ok(dev / n)
        }
    }
}

/// Median with the even-count convention of averaging the two central values.
/// Split search relies on the same convention, so parent and child impurities
/// stay comparable.
pub(crate) fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        let a = sorted[n / 2 - 1];
        let b = sorted[n / 2];
        a + (b - a) / 2.0
    }
}
