//! Negative-path checks: the stress tests must catch misbehaving
//! explainers, not just bless well-behaved ones.
//!
//! Two canonical saboteurs are judged end to end: a tree explainer with
//! fresh Gaussian noise added on every call (must fail the stability
//! test that the clean explainer passes), and a constant explainer (must
//! fail the noise-response test, so a metric that scores everything zero
//! can never be certified).

use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use stabench::meta::{
    certify, judge_run, JudgeParams, MetricKind, MetricSeries, TestKind, TestRun,
};
use stabench::metrics::{sensitivities, BallNorm, Explainer, MetricMode, NeighborhoodSpec};
use stabench::sab::{
    feature_matrix, generate_dataset_range, targets, AttributionFunction, DatasetSpec,
};
use stabench::tree::{fit_tree, RegressionTree, TreeExplainer, TreeHyperParams};

/// Per-coordinate standard deviation of the injected explanation noise.
const SABOTAGE_NOISE: f64 = 0.05;

/// Tree explainer that corrupts every explanation with fresh Gaussian
/// noise, so repeated calls at nearby inputs disagree.
struct SabotagedTreeExplainer<'a> {
    tree: &'a RegressionTree,
    seed: u64,
    calls: AtomicU64,
}

impl Explainer for SabotagedTreeExplainer<'_> {
    fn explain(&self, x: &[f64]) -> stabench::Result<Vec<f64>> {
        let mut relevance = self.tree.explain_local(x)?.relevance;
        let call = self.calls.fetch_add(1, Ordering::Relaxed);
        let mut rng =
            ChaCha8Rng::seed_from_u64(self.seed ^ call.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        for value in &mut relevance {
            *value += SABOTAGE_NOISE * rng.sample::<f64, _>(StandardNormal);
        }
        Ok(relevance)
    }
}

/// Explainer that returns the same attribution for every input.
struct ConstantExplainer(Vec<f64>);

impl Explainer for ConstantExplainer {
    fn explain(&self, _x: &[f64]) -> stabench::Result<Vec<f64>> {
        Ok(self.0.clone())
    }
}

/// Collects per-instance sensitivities into a judgeable run.
fn collect_run(
    test: TestKind,
    explainer: &dyn Explainer,
    inputs: &[Vec<f64>],
    spec: &NeighborhoodSpec,
    seed: u64,
) -> TestRun {
    let mut max_values = Vec::with_capacity(inputs.len());
    let mut avg_values = Vec::with_capacity(inputs.len());
    for (i, x) in inputs.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x51_7c_c1));
        let pair = sensitivities(explainer, None, x, spec, MetricMode::Raw, &mut rng)
            .expect("sensitivity estimation succeeds");
        max_values.push(pair.max);
        avg_values.push(pair.avg);
    }
    TestRun {
        test,
        mode: MetricMode::Raw,
        neighborhood: *spec,
        n_instances: inputs.len(),
        series: vec![
            MetricSeries {
                metric: MetricKind::MaxSensitivity,
                values: max_values,
            },
            MetricSeries {
                metric: MetricKind::AvgSensitivity,
                values: avg_values,
            },
        ],
    }
}

/// Small fitted tree plus a batch of probe inputs from the same domain.
fn fixture() -> (RegressionTree, Vec<Vec<f64>>) {
    let spec = DatasetSpec {
        width: 12,
        height: 12,
        max_count: 1,
        ..DatasetSpec::default()
    };
    let function = AttributionFunction::ssin();
    let train = generate_dataset_range(0, 400, &spec, &function, 9).expect("train split");
    let probe = generate_dataset_range(400, 50, &spec, &function, 9).expect("probe split");
    let features = feature_matrix(&train).expect("feature matrix");
    let tree = fit_tree(&features, &targets(&train), &TreeHyperParams::default(), 9)
        .expect("fit succeeds");
    let inputs = feature_matrix(&probe)
        .expect("probe matrix")
        .rows()
        .map(|row| row.to_vec())
        .collect();
    (tree, inputs)
}

#[test]
fn noisy_explanations_on_a_stable_model_fail_the_stability_test() {
    let (tree, inputs) = fixture();
    let spec = NeighborhoodSpec {
        epsilon: 0.1,
        n_samples: 30,
        norm: BallNorm::LInf,
        clip_to_domain: true,
    };
    let params = JudgeParams::default();

    // Control: the clean tree explainer passes the stability test.
    let clean = TreeExplainer::new(&tree);
    let clean_run = collect_run(TestKind::PerfectExplanation, &clean, &inputs, &spec, 21);
    for outcome in judge_run(&clean_run, &params).expect("judging succeeds") {
        assert!(
            outcome.passed,
            "{}: clean explainer must pass",
            outcome.metric
        );
        assert!(outcome.mean.abs() <= params.pet_tolerance);
    }

    // Same model, same inputs, but noise injected into each explanation:
    // both metrics must reject the run with a clearly nonzero mean.
    let sabotaged = SabotagedTreeExplainer {
        tree: &tree,
        seed: 77,
        calls: AtomicU64::new(0),
    };
    let run = collect_run(TestKind::PerfectExplanation, &sabotaged, &inputs, &spec, 21);
    let outcomes = judge_run(&run, &params).expect("judging succeeds");
    assert_eq!(outcomes.len(), 2);
    for outcome in &outcomes {
        assert!(
            !outcome.passed,
            "{}: sabotaged explainer must fail",
            outcome.metric
        );
        assert!(
            outcome.mean > params.pet_tolerance,
            "{}: mean {} should sit far above the tolerance",
            outcome.metric,
            outcome.mean
        );
        assert!(
            outcome.ci_low > 0.0,
            "noise pushes the whole interval above zero"
        );
    }
    for verdict in certify(&outcomes) {
        assert!(!verdict.certified);
    }
}

#[test]
fn a_constant_explainer_fails_the_noise_response_test() {
    let (_, inputs) = fixture();
    let spec = NeighborhoodSpec {
        epsilon: 0.1,
        n_samples: 30,
        norm: BallNorm::LInf,
        clip_to_domain: true,
    };
    let params = JudgeParams::default();

    // A metric evaluated on constant explanations reports exactly zero
    // everywhere, so its interval lower bound can never clear the noise
    // threshold and certification must be withheld.
    let constant = ConstantExplainer(vec![0.5; inputs[0].len()]);
    let run = collect_run(TestKind::RandomOutput, &constant, &inputs, &spec, 33);
    let outcomes = judge_run(&run, &params).expect("judging succeeds");
    assert_eq!(outcomes.len(), 2);
    for outcome in &outcomes {
        assert_eq!(
            outcome.mean, 0.0,
            "{}: constant explanations score zero",
            outcome.metric
        );
        assert_eq!((outcome.ci_low, outcome.ci_high), (0.0, 0.0));
        assert!(
            !outcome.passed,
            "{}: zero response must fail the noise test",
            outcome.metric
        );
        assert!(
            params.rot_threshold > 0.0,
            "threshold floor keeps zero responses failing"
        );
    }
    for verdict in certify(&outcomes) {
        assert!(!verdict.certified);
    }
}
