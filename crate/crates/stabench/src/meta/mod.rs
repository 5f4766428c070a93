//! Meta-evaluation of the robustness metrics themselves.
//!
//! Two calibration tests with known ground truth: an exactly stable
//! explainer that must score zero, and a pure-noise explainer that must be
//! flagged. Runs are judged with t-free normal confidence intervals and
//! collapsed into a per-metric certification verdict.

mod random;
mod runner;
mod stats;
mod verdict;

pub use random::{DeterminismMode, RandomExplainer, RandomPredictor};
pub use runner::{
    run_perfect_explanation, run_random_output, MetricKind, MetricSeries, TestKind, TestRun,
};
pub use stats::{confidence_interval, mean_std, normal_quantile};
pub use verdict::{certify, judge_run, JudgeParams, MetricVerdict, RunReport, TestOutcome};
