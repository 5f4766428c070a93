//! Benchmark configuration: one resolved, validated document that drives
//! generation, training, and evaluation, and is embedded verbatim in every
//! emitted report so a run can be reproduced from its outputs alone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meta::{DeterminismMode, JudgeParams, MetricKind};
use crate::metrics::{MetricMode, NeighborhoodSpec};
use crate::sab::DatasetSpec;
use crate::tree::{ImportanceMode, TreeHyperParams};

/// Which meta-tests an evaluation executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestSelection {
    Pet,
    Rot,
    #[default]
    All,
}

impl TestSelection {
    pub fn includes_pet(self) -> bool {
        matches!(self, TestSelection::Pet | TestSelection::All)
    }

    pub fn includes_rot(self) -> bool {
        matches!(self, TestSelection::Rot | TestSelection::All)
    }
}

impl std::fmt::Display for TestSelection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TestSelection::Pet => "pet",
            TestSelection::Rot => "rot",
            TestSelection::All => "all",
        })
    }
}

impl std::str::FromStr for TestSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pet" => Ok(TestSelection::Pet),
            "rot" => Ok(TestSelection::Rot),
            "all" => Ok(TestSelection::All),
            other => Err(Error::Config(format!(
                "unknown test selection '{other}'; available: pet, rot, all"
            ))),
        }
    }
}

/// Training section: tree growth, explanation weighting, and the optional
/// hyperparameter grid search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub params: TreeHyperParams,
    pub importance: ImportanceMode,
    /// Evaluate the full reference hyperparameter grid and keep the
    /// combination with the lowest validation MAE instead of `params`.
    pub grid_search: bool,
}

/// Meta-evaluation section: judgment thresholds, noise-run sizing, and which
/// metric modes are exercised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetaConfig {
    pub judge: JudgeParams,
    /// Number of random instances in the noise run.
    pub rot_instances: usize,
    /// How the noise explainer and predictor derive their randomness.
    pub determinism: DeterminismMode,
    /// Which sensitivity metrics are judged and reported.
    pub metrics: Vec<MetricKind>,
    /// Metric modes evaluated in every test.
    pub modes: Vec<MetricMode>,
    /// Which meta-tests run.
    pub tests: TestSelection,
    /// Prediction-change cutoff used by the replication profile; small
    /// enough that a noise predictor filters essentially every sample.
    pub replication_epsilon: f64,
}

impl Default for MetaConfig {
    fn default() -> Self {
        Self {
            judge: JudgeParams::default(),
            rot_instances: 500,
            determinism: DeterminismMode::StatelessResample,
            metrics: MetricKind::ALL.to_vec(),
            modes: MetricMode::ALL.to_vec(),
            tests: TestSelection::All,
            replication_epsilon: 1e-5,
        }
    }
}

/// The complete benchmark configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    /// Master seed; every random decision in the pipeline derives from it.
    pub seed: u64,
    /// Training split size.
    pub n_train: usize,
    /// Validation split size (also the stable-run instance set).
    pub n_val: usize,
    /// Scene geometry and texture of the synthetic dataset.
    pub dataset: DatasetSpec,
    pub train: TrainConfig,
    /// Perturbation ball sampled around each evaluated instance.
    pub neighborhood: NeighborhoodSpec,
    pub meta: MetaConfig,
    /// How many scenes to export as PNG image/heatmap pairs (0 = none).
    pub png_samples: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            n_train: 5000,
            n_val: 500,
            dataset: DatasetSpec::default(),
            train: TrainConfig::default(),
            neighborhood: NeighborhoodSpec::default(),
            meta: MetaConfig::default(),
            png_samples: 0,
        }
    }
}

impl BenchConfig {
    /// Checks every section before any work starts.
    pub fn validate(&self) -> Result<()> {
        if self.n_train == 0 {
            return Err(Error::Config("n_train must be positive".into()));
        }
        if self.n_val < 2 {
            return Err(Error::Config(
                "n_val must be at least 2 (interval estimation needs two observations)".into(),
            ));
        }
        self.dataset.validate()?;
        self.train.params.validate()?;
        self.neighborhood.validate()?;
        self.meta.judge.validate()?;
        if self.meta.rot_instances < 2 {
            return Err(Error::Config(
                "rot_instances must be at least 2 (interval estimation needs two observations)"
                    .into(),
            ));
        }
        if self.meta.metrics.is_empty() {
            return Err(Error::Config(format!(
                "at least one metric required; available: {}",
                MetricKind::ALL.map(|m| m.to_string()).join(", ")
            )));
        }
        for (i, metric) in self.meta.metrics.iter().enumerate() {
            if self.meta.metrics[..i].contains(metric) {
                return Err(Error::Config(format!("duplicate metric '{metric}'")));
            }
        }
        if self.meta.modes.is_empty() {
            return Err(Error::Config(format!(
                "at least one metric mode required; available: {}",
                MetricMode::ALL.map(|m| m.to_string()).join(", ")
            )));
        }
        for (i, mode) in self.meta.modes.iter().enumerate() {
            if self.meta.modes[..i].contains(mode) {
                return Err(Error::Config(format!("duplicate metric mode '{mode}'")));
            }
        }
        if !(self.meta.replication_epsilon > 0.0 && self.meta.replication_epsilon.is_finite()) {
            return Err(Error::Config(format!(
                "replication_epsilon must be positive and finite, got {}",
                self.meta.replication_epsilon
            )));
        }
        if self.png_samples > self.n_val {
            return Err(Error::Config(format!(
                "png_samples ({}) cannot exceed n_val ({})",
                self.png_samples, self.n_val
            )));
        }
        Ok(())
    }

    /// Feature dimension implied by the scene geometry; the trained tree and
    /// the noise run both use it.
    pub fn feature_dim(&self) -> usize {
        self.dataset.width * self.dataset.height
    }
}
