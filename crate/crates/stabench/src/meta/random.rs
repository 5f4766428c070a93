//! Reference "worst case" models: explainers and predictors that return pure
//! noise.
//!
//! A sound robustness metric must flag these as maximally unstable — their
//! output carries no information about the input, so explanations of
//! neighboring points are unrelated by construction.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::metrics::{Explainer, Predictor};

/// How the noise models derive randomness from a call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeterminismMode {
    /// Every call draws fresh noise (distinct RNG stream per call), even for
    /// identical inputs. This is the literal "random output" reading.
    StatelessResample,
    /// The noise is a deterministic function of the input bytes, so repeated
    /// calls with the same input agree while nearby inputs stay unrelated.
    InputKeyed,
}

impl std::fmt::Display for DeterminismMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DeterminismMode::StatelessResample => "stateless_resample",
            DeterminismMode::InputKeyed => "input_keyed",
        })
    }
}

/// RNG for one call: either the next counter stream or an input-keyed seed.
fn call_rng(seed: u64, mode: DeterminismMode, calls: &AtomicU64, x: &[f64]) -> ChaCha8Rng {
    match mode {
        DeterminismMode::StatelessResample => {
            let call = calls.fetch_add(1, Ordering::Relaxed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(call);
            rng
        }
        DeterminismMode::InputKeyed => {
            let mut hasher = Sha256::new();
            hasher.update(seed.to_le_bytes());
            for v in x {
                hasher.update(v.to_le_bytes());
            }
            ChaCha8Rng::from_seed(hasher.finalize().into())
        }
    }
}

/// Explainer that outputs independent standard normal relevance per feature.
#[derive(Debug)]
pub struct RandomExplainer {
    seed: u64,
    mode: DeterminismMode,
    calls: AtomicU64,
}

impl RandomExplainer {
    pub fn new(seed: u64, mode: DeterminismMode) -> Self {
        Self {
            seed,
            mode,
            calls: AtomicU64::new(0),
        }
    }
}

impl Explainer for RandomExplainer {
    fn explain(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut rng = call_rng(self.seed, self.mode, &self.calls, x);
        Ok((0..x.len()).map(|_| rng.sample(StandardNormal)).collect())
    }
}

/// Predictor that outputs a uniform draw from [0, 1).
#[derive(Debug)]
pub struct RandomPredictor {
    seed: u64,
    mode: DeterminismMode,
    calls: AtomicU64,
}

impl RandomPredictor {
    pub fn new(seed: u64, mode: DeterminismMode) -> Self {
        Self {
            seed,
            mode,
            calls: AtomicU64::new(0),
        }
    }
}

impl Predictor for RandomPredictor {
    fn predict(&self, x: &[f64]) -> Result<f64> {
        let mut rng = call_rng(self.seed, self.mode, &self.calls, x);
        Ok(rng.random::<f64>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stateless_mode_resamples_on_every_call() {
        let e = RandomExplainer::new(7, DeterminismMode::StatelessResample);
        let x = vec![0.5; 16];
        let a = e.explain(&x).unwrap();
        let b = e.explain(&x).unwrap();
        assert_eq!(a.len(), 16);
        assert_ne!(a, b, "identical input must still get fresh noise");
    }

    #[test]
    fn stateless_call_sequences_replay_across_instances() {
        let x = vec![0.25; 8];
        let y = vec![0.75; 8];
        let e1 = RandomExplainer::new(11, DeterminismMode::StatelessResample);
        let seq1 = [
            e1.explain(&x).unwrap(),
            e1.explain(&y).unwrap(),
            e1.explain(&x).unwrap(),
        ];
        let e2 = RandomExplainer::new(11, DeterminismMode::StatelessResample);
        let seq2 = [
            e2.explain(&x).unwrap(),
            e2.explain(&y).unwrap(),
            e2.explain(&x).unwrap(),
        ];
        assert_eq!(seq1, seq2, "same seed and call order must replay exactly");
        assert_ne!(seq1[0], seq1[2], "even repeated inputs draw new noise");
    }

    #[test]
    fn input_keyed_mode_is_a_pure_function_of_the_input() {
        let e = RandomExplainer::new(3, DeterminismMode::InputKeyed);
        let x = vec![0.1, 0.9, 0.5];
        let y = vec![0.1, 0.9, 0.5000001];
        assert_eq!(e.explain(&x).unwrap(), e.explain(&x).unwrap());
        assert_ne!(e.explain(&x).unwrap(), e.explain(&y).unwrap());

        let p = RandomPredictor::new(3, DeterminismMode::InputKeyed);
        assert_eq!(p.predict(&x).unwrap(), p.predict(&x).unwrap());
        assert_ne!(p.predict(&x).unwrap(), p.predict(&y).unwrap());
    }

    #[test]
    fn different_seeds_give_unrelated_noise() {
        let x = vec![0.5; 4];
        let a = RandomExplainer::new(1, DeterminismMode::InputKeyed)
            .explain(&x)
            .unwrap();
        let b = RandomExplainer::new(2, DeterminismMode::InputKeyed)
            .explain(&x)
            .unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn predictions_live_in_the_unit_interval() {
        let p = RandomPredictor::new(5, DeterminismMode::StatelessResample);
        for i in 0..100 {
            let v = p.predict(&[i as f64]).unwrap();
            assert!((0.0..1.0).contains(&v));
        }
    }

    #[test]
    fn normal_noise_has_roughly_unit_spread() {
        let e = RandomExplainer::new(9, DeterminismMode::StatelessResample);
        let sample = e.explain(&vec![0.0; 10_000]).unwrap();
        let mean = sample.iter().sum::<f64>() / sample.len() as f64;
        let var = sample.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / sample.len() as f64;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "variance {var}");
    }
}
