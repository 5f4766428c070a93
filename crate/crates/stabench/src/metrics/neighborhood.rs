//! Perturbation neighborhoods: balls around an instance in L-infinity or L2.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which ball the perturbations are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallNorm {
    /// Independent per-coordinate offsets, each strictly inside (-eps, eps).
    LInf,
    /// Random direction scaled by a radius drawn uniformly from [0, eps).
    L2,
}

impl std::fmt::Display for BallNorm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BallNorm::LInf => "linf",
            BallNorm::L2 => "l2",
        })
    }
}

/// Sampling plan for the neighborhood of one instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NeighborhoodSpec {
    /// Ball radius (strict upper bound on the perturbation norm).
    pub epsilon: f64,
    /// Number of perturbed copies drawn per instance.
    pub n_samples: usize,
    pub norm: BallNorm,
    /// Clamp perturbed coordinates back into [0, 1].
    pub clip_to_domain: bool,
}

impl Default for NeighborhoodSpec {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            n_samples: 50,
            norm: BallNorm::LInf,
            clip_to_domain: true,
        }
    }
}

impl NeighborhoodSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(Error::Config(format!(
                "neighborhood epsilon must be a positive finite number, got {}",
                self.epsilon
            )));
        }
        if self.n_samples == 0 {
            return Err(Error::Config(
                "neighborhood needs at least one sample".into(),
            ));
        }
        Ok(())
    }
}

/// Draws `spec.n_samples` perturbed copies of `x`.
///
/// Samples are generated one after another, so the first `m` samples of a
/// larger draw coincide with an `m`-sample draw from the same RNG state
/// (nested neighborhoods for free). When clipping is requested the base
/// instance itself must already live in [0, 1]; clamping then only ever
/// shrinks the perturbation, keeping every sample strictly inside the ball.
pub fn sample_neighborhood<R: Rng + ?Sized>(
    x: &[f64],
    spec: &NeighborhoodSpec,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    if x.is_empty() {
        return Err(Error::Domain(
            "cannot perturb a zero-dimensional instance".into(),
        ));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("instance coordinates must be finite".into()));
    }
    if spec.clip_to_domain && x.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::Domain(
            "clipping to [0, 1] requires the instance itself to lie in [0, 1]".into(),
        ));
    }

    let d = x.len();
    let mut samples = Vec::with_capacity(spec.n_samples);
    for _ in 0..spec.n_samples {
        let mut z = x.to_vec();
        match spec.norm {
            BallNorm::LInf => {
                for coord in z.iter_mut() {
                    // u in (0, 1): redraw the measure-zero 0.0 so the offset
                    // magnitude stays strictly below epsilon.
                    let mut u = rng.random::<f64>();
                    while u == 0.0 {
                        u = rng.random::<f64>();
                    }
                    *coord += spec.epsilon * (2.0 * u - 1.0);
                }
            }
            BallNorm::L2 => {
                let mut dir = vec![0.0f64; d];
                let mut norm = 0.0;
                while norm == 0.0 {
                    for v in dir.iter_mut() {
                        *v = rng.sample(StandardNormal);
                    }
                    norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                }
                let radius = rng.random::<f64>() * spec.epsilon;
                for (coord, v) in z.iter_mut().zip(&dir) {
                    *coord += radius * v / norm;
                }
            }
        }
        if spec.clip_to_domain {
            for coord in z.iter_mut() {
                *coord = coord.clamp(0.0, 1.0);
            }
        }
        samples.push(z);
    }
    Ok(samples)
}
