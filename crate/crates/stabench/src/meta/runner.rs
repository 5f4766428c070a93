//! Meta-test execution: evaluating the robustness metrics against explainers
//! with known ground-truth stability.
//!
//! The perfect-explanation run scores a fitted tree, whose path-based
//! explanations are exactly stable inside a small enough ball; the
//! random-output run scores pure-noise models, which no sound metric may call
//! stable. Every instance draws its RNGs from (master seed, instance index,
//! purpose salt), so results are independent of evaluation order and
//! identical across thread counts.

use serde::{Deserialize, Serialize};

use crate::data::FeatureMatrix;
use crate::error::{Error, Result};
use crate::meta::random::{DeterminismMode, RandomExplainer, RandomPredictor};
use crate::metrics::{sensitivities, MetricMode, NeighborhoodSpec, Predictor};
use crate::parallel::try_map_indexed;
use crate::seeding::{item_rng, salt, subseed};
use crate::tree::{ImportanceMode, RegressionTree, TreeExplainer};

/// Which meta-test produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    /// Exactly stable explainer; the metric must report zero.
    PerfectExplanation,
    /// Pure-noise explainer and predictor; the metric must fire clearly.
    RandomOutput,
}

impl TestKind {
    pub const ALL: [TestKind; 2] = [TestKind::PerfectExplanation, TestKind::RandomOutput];
}

impl std::fmt::Display for TestKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TestKind::PerfectExplanation => "perfect_explanation",
            TestKind::RandomOutput => "random_output",
        })
    }
}

/// Which aggregation of the neighborhood distances is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetricKind {
    #[serde(rename = "max_sens")]
    MaxSensitivity,
    #[serde(rename = "avg_sens")]
    AvgSensitivity,
}

impl MetricKind {
    pub const ALL: [MetricKind; 2] = [MetricKind::MaxSensitivity, MetricKind::AvgSensitivity];
}

impl std::fmt::Display for MetricKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MetricKind::MaxSensitivity => "max_sens",
            MetricKind::AvgSensitivity => "avg_sens",
        })
    }
}

impl std::str::FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max_sens" => Ok(MetricKind::MaxSensitivity),
            "avg_sens" => Ok(MetricKind::AvgSensitivity),
            other => Err(Error::Config(format!(
                "unknown metric '{other}'; available: max_sens, avg_sens"
            ))),
        }
    }
}

/// Per-instance values of one metric within one test run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub metric: MetricKind,
    pub values: Vec<f64>,
}

/// One meta-test execution: both metrics over the same instances and draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRun {
    pub test: TestKind,
    pub mode: MetricMode,
    pub neighborhood: NeighborhoodSpec,
    pub n_instances: usize,
    pub series: Vec<MetricSeries>,
}

impl TestRun {
    fn from_pairs(
        test: TestKind,
        mode: MetricMode,
        neighborhood: NeighborhoodSpec,
        pairs: Vec<crate::metrics::SensitivityPair>,
    ) -> Self {
        let max = pairs.iter().map(|p| p.max).collect();
        let avg = pairs.iter().map(|p| p.avg).collect();
        Self {
            test,
            mode,
            neighborhood,
            n_instances: pairs.len(),
            series: vec![
                MetricSeries {
                    metric: MetricKind::MaxSensitivity,
                    values: max,
                },
                MetricSeries {
                    metric: MetricKind::AvgSensitivity,
                    values: avg,
                },
            ],
        }
    }

    /// The value series of one metric.
    pub fn series_for(&self, metric: MetricKind) -> Option<&MetricSeries> {
        self.series.iter().find(|s| s.metric == metric)
    }
}

/// Scores a fitted tree's explanations over held-out instances.
///
/// Instance `i` perturbs row `i` of `instances` with the RNG derived from
/// `(master_seed, i)`; the tree itself doubles as the predictor for the
/// prediction-filtered mode.
pub fn run_perfect_explanation(
    tree: &RegressionTree,
    instances: &FeatureMatrix,
    neighborhood: &NeighborhoodSpec,
    mode: MetricMode,
    importance: ImportanceMode,
    master_seed: u64,
) -> Result<TestRun> {
    if instances.n_rows() == 0 {
        return Err(Error::Evaluation("no instances to evaluate".into()));
    }
    if instances.n_cols() != tree.n_features {
        return Err(Error::Inconsistency(format!(
            "instances have {} features, tree expects {}",
            instances.n_cols(),
            tree.n_features
        )));
    }
    let pairs = try_map_indexed(instances.n_rows(), |i| {
        let explainer = TreeExplainer::with_mode(tree, importance);
        let mut rng = item_rng(master_seed, i as u64, salt::PET_METRIC);
        sensitivities(
            &explainer,
            Some(tree as &dyn Predictor),
            instances.row(i),
            neighborhood,
            mode,
            &mut rng,
        )
    })?;
    Ok(TestRun::from_pairs(
        TestKind::PerfectExplanation,
        mode,
        *neighborhood,
        pairs,
    ))
}

/// Scores pure-noise models on uniform random instances of dimension `dim`.
///
/// Each instance builds fresh noise models from its own sub-seeds, so the
/// run is order-independent and reproducible for a fixed master seed.
pub fn run_random_output(
    dim: usize,
    n_instances: usize,
    neighborhood: &NeighborhoodSpec,
    mode: MetricMode,
    determinism: DeterminismMode,
    master_seed: u64,
) -> Result<TestRun> {
    if dim == 0 {
        return Err(Error::Config("instance dimension must be positive".into()));
    }
    if n_instances == 0 {
        return Err(Error::Evaluation("no instances to evaluate".into()));
    }
    let pairs = try_map_indexed(n_instances, |i| {
        let i = i as u64;
        let mut input_rng = item_rng(master_seed, i, salt::ROT_INPUT);
        let x: Vec<f64> = (0..dim)
            .map(|_| rand::Rng::random::<f64>(&mut input_rng))
            .collect();
        let explainer =
            RandomExplainer::new(subseed(master_seed, i, salt::ROT_EXPLAINER), determinism);
        let predictor =
            RandomPredictor::new(subseed(master_seed, i, salt::ROT_PREDICTOR), determinism);
        let mut rng = item_rng(master_seed, i, salt::ROT_METRIC);
        sensitivities(
            &explainer,
            Some(&predictor),
            &x,
            neighborhood,
            mode,
            &mut rng,
        )
    })?;
    Ok(TestRun::from_pairs(
        TestKind::RandomOutput,
        mode,
        *neighborhood,
        pairs,
    ))
}
