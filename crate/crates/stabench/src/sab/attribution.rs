//! Target function and exact ground-truth attributions.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sab::patterns::{KindMask, PatternKind, PixelKind, NUM_PATTERN_KINDS};

/// Weights of the three pattern kinds in the default target function.
pub const SSIN_WEIGHTS: [f64; NUM_PATTERN_KINDS] = [0.55, 0.27, 0.18];

/// Monotone sinusoidal target:
/// `ssin(g) = 0.55 sin(pi/2 g1) + 0.27 sin(pi/2 g2) + 0.18 sin(pi/2 g3)`
/// for normalized counts `g` in `[0, 1]^3`. The weights sum to one and
/// `sin` is increasing on `[0, pi/2]`, so the output spans `[0, 1]` and is
/// strictly monotone in every coordinate.
pub fn ssin(normalized_counts: &[f64; NUM_PATTERN_KINDS]) -> Result<f64> {
    AttributionFunction::ssin().value(normalized_counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum TermKind {
    /// `w * sin(pi/2 * g)`
    Sine,
    /// `w * g`
    Linear,
}

/// Weighted per-pattern target function. Only the sinusoidal default
/// ([`AttributionFunction::ssin`]) and a plain linear variant are built in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionFunction {
    name: String,
    weights: [f64; NUM_PATTERN_KINDS],
    term: TermKind,
}

impl AttributionFunction {
    /// The default sinusoidal target with weights 0.55 / 0.27 / 0.18.
    pub fn ssin() -> Self {
        Self {
            name: "ssin".into(),
            weights: SSIN_WEIGHTS,
            term: TermKind::Sine,
        }
    }

    /// Linear target `sum_j w_j g_j` with strictly positive weights.
    pub fn linear(weights: [f64; NUM_PATTERN_KINDS]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::Config(
                "attribution weights must be strictly positive".into(),
            ));
        }
        Ok(Self {
            name: "linear".into(),
            weights,
            term: TermKind::Linear,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn weights(&self) -> [f64; NUM_PATTERN_KINDS] {
        self.weights
    }

    /// Contribution of pattern kind `j` at normalized count `g`.
    pub fn term(&self, j: usize, g: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&g) {
            return Err(Error::Domain(format!(
                "normalized count {g} for pattern {j} outside [0, 1]"
            )));
        }
        let shaped = match self.term {
            TermKind::Sine => (FRAC_PI_2 * g).sin(),
            TermKind::Linear => g,
        };
        Ok(self.weights[j] * shaped)
    }

    /// Full target value: the sum of all per-pattern terms.
    pub fn value(&self, g: &[f64; NUM_PATTERN_KINDS]) -> Result<f64> {
        let mut total = 0.0;
        for (j, gj) in g.iter().enumerate() {
            total += self.term(j, *gj)?;
        }
        Ok(total)
    }
}

/// Distributes each pattern kind's target contribution uniformly over that
/// kind's pixels; background pixels get zero. The per-kind pixel sums are
/// exactly the terms of the target, so the mask is a faithful per-pixel
/// attribution of the prediction.
pub fn gt_attribution_mask(
    mask: &KindMask,
    normalized_counts: &[f64; NUM_PATTERN_KINDS],
    function: &AttributionFunction,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; mask.width() * mask.height()];
    for kind in PatternKind::ALL {
        let j = kind.index();
        let term = function.term(j, normalized_counts[j])?;
        let n = mask.count(kind);
        if n == 0 {
            if term > 0.0 {
                return Err(Error::Inconsistency(format!(
                    "pattern {kind:?} contributes {term} but owns no pixels"
                )));
            }
            continue;
        }
        let share = term / n as f64;
        for (cell, slot) in mask.cells().iter().zip(out.iter_mut()) {
            if *cell == PixelKind::Pattern(kind) {
                *slot = share;
            }
        }
    }
    Ok(out)
}
