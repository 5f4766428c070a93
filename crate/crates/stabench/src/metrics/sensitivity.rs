//! Robustness metrics: maximum and average explanation sensitivity under
//! input perturbations.
//!
//! Both metrics share one engine so every perturbed sample is explained once
//! and the same distances feed the maximum and the mean — by construction the
//! average can never exceed the maximum for the same instance and seed.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::neighborhood::{sample_neighborhood, NeighborhoodSpec};

/// Anything that maps an instance to a feature-relevance vector.
pub trait Explainer: Sync {
    fn explain(&self, x: &[f64]) -> Result<Vec<f64>>;
}

/// Anything that maps an instance to a scalar prediction.
pub trait Predictor: Sync {
    fn predict(&self, x: &[f64]) -> Result<f64>;
}

/// Post-processing applied to the raw explanation distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricMode {
    /// Plain distances.
    Raw,
    /// Distances divided by the norm of the base explanation.
    Relative,
    /// Perturbations that noticeably change the prediction are discarded
    /// before the distances are aggregated.
    #[serde(rename = "pred_filtered")]
    PredictionFiltered,
}

impl MetricMode {
    pub const ALL: [MetricMode; 3] = [
        MetricMode::Raw,
        MetricMode::Relative,
        MetricMode::PredictionFiltered,
    ];
}

impl std::fmt::Display for MetricMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MetricMode::Raw => "raw",
            MetricMode::Relative => "relative",
            MetricMode::PredictionFiltered => "pred_filtered",
        })
    }
}

impl std::str::FromStr for MetricMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(MetricMode::Raw),
            "relative" => Ok(MetricMode::Relative),
            "pred_filtered" => Ok(MetricMode::PredictionFiltered),
            other => Err(Error::Config(format!(
                "unknown metric mode '{other}'; available: raw, relative, pred_filtered"
            ))),
        }
    }
}

/// Division guard for relative mode when the base explanation is all zeros.
const RELATIVE_NORM_FLOOR: f64 = 1e-12;

/// Maximum and average sensitivity of one instance, computed from the same
/// perturbation draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityPair {
    pub max: f64,
    pub avg: f64,
}

/// Frobenius distance between two relevance vectors of equal length.
pub fn frobenius_diff(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Inconsistency(format!(
            "explanations have mismatched lengths ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// Evaluates both sensitivity metrics for one instance.
///
/// `predictor` is only consulted in prediction-filtered mode, where samples
/// whose prediction moves by at least `spec.epsilon` are dropped; when every
/// sample is dropped both metrics are defined as zero. In relative mode the
/// distances are divided by the base explanation norm (floored at 1e-12).
pub fn sensitivities<R: Rng + ?Sized>(
    explainer: &dyn Explainer,
    predictor: Option<&dyn Predictor>,
    x: &[f64],
    spec: &NeighborhoodSpec,
    mode: MetricMode,
    rng: &mut R,
) -> Result<SensitivityPair> {
    let base = explainer.explain(x)?;
    if base.len() != x.len() {
        return Err(Error::Inconsistency(format!(
            "explanation length {} does not match instance length {}",
            base.len(),
            x.len()
        )));
    }
    let samples = sample_neighborhood(x, spec, rng)?;

    let kept: Vec<&Vec<f64>> = match mode {
        MetricMode::Raw | MetricMode::Relative => samples.iter().collect(),
        MetricMode::PredictionFiltered => {
            let predictor = predictor.ok_or_else(|| {
                Error::Config("prediction-filtered mode requires a predictor".into())
            })?;
            let base_pred = predictor.predict(x)?;
            let mut kept = Vec::with_capacity(samples.len());
            for z in &samples {
                if (predictor.predict(z)? - base_pred).abs() < spec.epsilon {
                    kept.push(z);
                }
            }
            kept
        }
    };
    if kept.is_empty() {
        return Ok(SensitivityPair { max: 0.0, avg: 0.0 });
    }

    let scale = match mode {
        MetricMode::Relative => {
            let norm = base.iter().map(|v| v * v).sum::<f64>().sqrt();
            norm.max(RELATIVE_NORM_FLOOR)
        }
        _ => 1.0,
    };

    let mut max = 0.0f64;
    let mut sum = 0.0f64;
    for z in &kept {
        let distance = frobenius_diff(&explainer.explain(z)?, &base)? / scale;
        max = max.max(distance);
        sum += distance;
    }
    Ok(SensitivityPair {
        max,
        avg: sum / kept.len() as f64,
    })
}

/// Largest explanation distance over the neighborhood (see [`sensitivities`]).
pub fn max_sensitivity<R: Rng + ?Sized>(
    explainer: &dyn Explainer,
    predictor: Option<&dyn Predictor>,
    x: &[f64],
    spec: &NeighborhoodSpec,
    mode: MetricMode,
    rng: &mut R,
) -> Result<f64> {
    Ok(sensitivities(explainer, predictor, x, spec, mode, rng)?.max)
}

/// Mean explanation distance over the neighborhood (see [`sensitivities`]).
pub fn avg_sensitivity<R: Rng + ?Sized>(
    explainer: &dyn Explainer,
    predictor: Option<&dyn Predictor>,
    x: &[f64],
    spec: &NeighborhoodSpec,
    mode: MetricMode,
    rng: &mut R,
) -> Result<f64> {
    Ok(sensitivities(explainer, predictor, x, spec, mode, rng)?.avg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct ConstantExplainer(Vec<f64>);
    impl Explainer for ConstantExplainer {
        fn explain(&self, _x: &[f64]) -> Result<Vec<f64>> {
            Ok(self.0.clone())
        }
    }

    /// The explanation is the input itself, so explanation distances equal
    /// input distances.
    struct IdentityExplainer;
    impl Explainer for IdentityExplainer {
        fn explain(&self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(x.to_vec())
        }
    }

    struct WrongLengthExplainer;
    impl Explainer for WrongLengthExplainer {
        fn explain(&self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![0.0; x.len() + 1])
        }
    }

    /// Amplifies the coordinate sum so that any perturbation moves the
    /// prediction far past epsilon.
    struct AmplifiedSumPredictor;
    impl Predictor for AmplifiedSumPredictor {
        fn predict(&self, x: &[f64]) -> Result<f64> {
            Ok(1e9 * x.iter().sum::<f64>())
        }
    }

    struct ConstantPredictor;
    impl Predictor for ConstantPredictor {
        fn predict(&self, _x: &[f64]) -> Result<f64> {
            Ok(0.0)
        }
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn constant_explanations_have_zero_sensitivity() {
        let x = vec![0.5; 12];
        let spec = NeighborhoodSpec::default();
        for mode in [MetricMode::Raw, MetricMode::Relative] {
            let pair = sensitivities(
                &ConstantExplainer(vec![1.0; 12]),
                None,
                &x,
                &spec,
                mode,
                &mut rng(1),
            )
            .unwrap();
            assert_eq!(pair.max, 0.0);
            assert_eq!(pair.avg, 0.0);
        }
    }

    #[test]
    fn identity_explainer_reports_neighborhood_distances() {
        let x = vec![0.5; 6];
        let spec = NeighborhoodSpec {
            clip_to_domain: false,
            ..Default::default()
        };
        // Oracle: replay the identical perturbation stream and aggregate by hand.
        let samples = sample_neighborhood(&x, &spec, &mut rng(9)).unwrap();
        let dists: Vec<f64> = samples
            .iter()
            .map(|z| {
                z.iter()
                    .zip(&x)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        let expect_max = dists.iter().copied().fold(0.0f64, f64::max);
        let expect_avg = dists.iter().sum::<f64>() / dists.len() as f64;

        let pair = sensitivities(
            &IdentityExplainer,
            None,
            &x,
            &spec,
            MetricMode::Raw,
            &mut rng(9),
        )
        .unwrap();
        assert!((pair.max - expect_max).abs() < 1e-15);
        assert!((pair.avg - expect_avg).abs() < 1e-15);
        assert!(pair.avg <= pair.max);
    }

    #[test]
    fn relative_mode_divides_by_the_base_norm() {
        let x = vec![0.3, 0.4]; // norm 0.5
        let spec = NeighborhoodSpec {
            clip_to_domain: false,
            ..Default::default()
        };
        let raw = sensitivities(
            &IdentityExplainer,
            None,
            &x,
            &spec,
            MetricMode::Raw,
            &mut rng(3),
        )
        .unwrap();
        let rel = sensitivities(
            &IdentityExplainer,
            None,
            &x,
            &spec,
            MetricMode::Relative,
            &mut rng(3),
        )
        .unwrap();
        assert!((rel.max - raw.max / 0.5).abs() < 1e-12);
        assert!((rel.avg - raw.avg / 0.5).abs() < 1e-12);
    }

    #[test]
    fn relative_mode_with_zero_base_explanation_stays_finite() {
        let x = vec![0.5; 4];
        let spec = NeighborhoodSpec::default();
        let pair = sensitivities(
            &ConstantExplainer(vec![0.0; 4]),
            None,
            &x,
            &spec,
            MetricMode::Relative,
            &mut rng(4),
        )
        .unwrap();
        assert!(pair.max.is_finite() && pair.avg.is_finite());
        assert_eq!(pair.max, 0.0);
    }

    #[test]
    fn prediction_filter_drops_samples_that_move_the_prediction() {
        let x = vec![0.5; 64];
        let spec = NeighborhoodSpec::default();
        let pair = sensitivities(
            &IdentityExplainer,
            Some(&AmplifiedSumPredictor),
            &x,
            &spec,
            MetricMode::PredictionFiltered,
            &mut rng(5),
        )
        .unwrap();
        assert_eq!(pair, SensitivityPair { max: 0.0, avg: 0.0 });

        // A constant predictor keeps every sample: identical to raw mode.
        let raw = sensitivities(
            &IdentityExplainer,
            None,
            &x,
            &spec,
            MetricMode::Raw,
            &mut rng(6),
        )
        .unwrap();
        let filtered = sensitivities(
            &IdentityExplainer,
            Some(&ConstantPredictor),
            &x,
            &spec,
            MetricMode::PredictionFiltered,
            &mut rng(6),
        )
        .unwrap();
        assert_eq!(raw, filtered);
    }

    #[test]
    fn prediction_filtered_mode_requires_a_predictor() {
        let x = vec![0.5; 4];
        let spec = NeighborhoodSpec::default();
        let err = sensitivities(
            &IdentityExplainer,
            None,
            &x,
            &spec,
            MetricMode::PredictionFiltered,
            &mut rng(7),
        );
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn mismatched_explanation_lengths_are_an_inconsistency() {
        let x = vec![0.5; 4];
        let spec = NeighborhoodSpec::default();
        let err = sensitivities(
            &WrongLengthExplainer,
            None,
            &x,
            &spec,
            MetricMode::Raw,
            &mut rng(8),
        );
        assert!(matches!(err, Err(Error::Inconsistency(_))));
        assert!(matches!(
            frobenius_diff(&[1.0], &[1.0, 2.0]),
            Err(Error::Inconsistency(_))
        ));
    }

    #[test]
    fn wrapper_functions_agree_with_the_pair_engine() {
        let x = vec![0.5; 8];
        let spec = NeighborhoodSpec::default();
        let pair = sensitivities(
            &IdentityExplainer,
            None,
            &x,
            &spec,
            MetricMode::Raw,
            &mut rng(10),
        )
        .unwrap();
        let max = max_sensitivity(
            &IdentityExplainer,
            None,
            &x,
            &spec,
            MetricMode::Raw,
            &mut rng(10),
        )
        .unwrap();
        let avg = avg_sensitivity(
            &IdentityExplainer,
            None,
            &x,
            &spec,
            MetricMode::Raw,
            &mut rng(10),
        )
        .unwrap();
        assert_eq!(pair.max, max);
        assert_eq!(pair.avg, avg);
    }

    #[test]
    fn frobenius_diff_matches_the_euclidean_norm() {
        let d = frobenius_diff(&[1.0, 2.0, 3.0], &[1.0, 0.0, 6.0]).unwrap();
        assert!((d - (4.0f64 + 9.0).sqrt()).abs() < 1e-15);
        assert_eq!(frobenius_diff(&[1.0], &[1.0]).unwrap(), 0.0);
    }
}
