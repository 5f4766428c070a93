//! Judging meta-test runs: confidence intervals, pass/fail decisions, and
//! the certification verdict per metric and mode.
//!
//! A metric configuration is certified only when it reports zero instability
//! on the exactly-stable explainer (interval covers zero and the mean is
//! below tolerance) and clearly flags the pure-noise explainer (interval
//! lower bound above threshold).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meta::runner::{MetricKind, TestKind, TestRun};
use crate::meta::stats::{confidence_interval, mean_std};
use crate::metrics::MetricMode;

/// Decision thresholds for judging meta-test runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JudgeParams {
    /// Two-sided significance level of the confidence intervals.
    pub alpha: f64,
    /// Largest mean the exactly-stable run may report and still pass.
    pub pet_tolerance: f64,
    /// The noise run passes only if its interval lower bound clears this.
    pub rot_threshold: f64,
}

impl Default for JudgeParams {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            pet_tolerance: 1e-3,
            rot_threshold: 0.1,
        }
    }
}

impl JudgeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if !(self.pet_tolerance >= 0.0 && self.pet_tolerance.is_finite()) {
            return Err(Error::Config(format!(
                "stability tolerance must be finite and non-negative, got {}",
                self.pet_tolerance
            )));
        }
        if !(self.rot_threshold >= 0.0 && self.rot_threshold.is_finite()) {
            return Err(Error::Config(format!(
                "noise threshold must be finite and non-negative, got {}",
                self.rot_threshold
            )));
        }
        Ok(())
    }
}

/// The judged result of one (test, metric, mode) cell.
///
/// `expected` is a report annotation, not part of the decision rule: the
/// stable run expects 0.0, while the noise run carries the nominal 1.0 of
/// an idealized bounded instability score (the sensitivity metrics are
/// unbounded above, so pass/fail uses the interval-vs-threshold rule).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub test: TestKind,
    pub metric: MetricKind,
    pub mode: MetricMode,
    pub epsilon: f64,
    pub n_samples: usize,
    pub n_instances: usize,
    pub expected: f64,
    pub mean: f64,
    pub std: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub passed: bool,
    pub detail: String,
}

/// Certification of one metric/mode pair: both meta-tests must pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricVerdict {
    pub metric: MetricKind,
    pub mode: MetricMode,
    pub perfect_explanation_passed: bool,
    pub random_output_passed: bool,
    pub certified: bool,
}

/// Judges one run, producing an outcome per metric series.
pub fn judge_run(run: &TestRun, params: &JudgeParams) -> Result<Vec<TestOutcome>> {
    params.validate()?;
    let mut outcomes = Vec::with_capacity(run.series.len());
    for series in &run.series {
        let (ci_low, ci_high) = confidence_interval(&series.values, params.alpha)?;
        let (mean, std) = mean_std(&series.values)?;
        let expected = match run.test {
            TestKind::PerfectExplanation => 0.0,
            TestKind::RandomOutput => 1.0,
        };
        let (passed, detail) = match run.test {
            TestKind::PerfectExplanation => {
                let covers_zero = ci_low <= 0.0 && 0.0 <= ci_high;
                let small = mean <= params.pet_tolerance;
                let passed = covers_zero && small;
                let detail = if passed {
                    "stable explainer correctly scored as stable".to_string()
                } else {
                    format!(
                        "spurious instability reported for an exactly stable explainer \
                         (mean {mean:.6}, interval [{ci_low:.6}, {ci_high:.6}])"
                    )
                };
                (passed, detail)
            }
            TestKind::RandomOutput => {
                let passed = ci_low > params.rot_threshold;
                let detail = if passed {
                    "unrobust explainer detected".to_string()
                } else {
                    format!(
                        "unrobustness missed: interval lower bound {ci_low:.6} \
                         not above {}",
                        params.rot_threshold
                    )
                };
                (passed, detail)
            }
        };
        outcomes.push(TestOutcome {
            test: run.test,
            metric: series.metric,
            mode: run.mode,
            epsilon: run.neighborhood.epsilon,
            n_samples: run.neighborhood.n_samples,
            n_instances: run.n_instances,
            expected,
            mean,
            std,
            ci_low,
            ci_high,
            passed,
            detail,
        });
    }
    Ok(outcomes)
}

/// Collapses judged outcomes into per-(metric, mode) certifications.
///
/// A pair is certified only if it has outcomes from both tests and every
/// one of them passed.
pub fn certify(outcomes: &[TestOutcome]) -> Vec<MetricVerdict> {
    let mut verdicts = Vec::new();
    for outcome in outcomes {
        if !verdicts
            .iter()
            .any(|v: &MetricVerdict| v.metric == outcome.metric && v.mode == outcome.mode)
        {
            verdicts.push(MetricVerdict {
                metric: outcome.metric,
                mode: outcome.mode,
                perfect_explanation_passed: false,
                random_output_passed: false,
                certified: false,
            });
        }
    }
    for verdict in &mut verdicts {
        let cell = |test: TestKind| {
            let mut found = false;
            let mut all_passed = true;
            for o in outcomes {
                if o.metric == verdict.metric && o.mode == verdict.mode && o.test == test {
                    found = true;
                    all_passed &= o.passed;
                }
            }
            found && all_passed
        };
        verdict.perfect_explanation_passed = cell(TestKind::PerfectExplanation);
        verdict.random_output_passed = cell(TestKind::RandomOutput);
        verdict.certified = verdict.perfect_explanation_passed && verdict.random_output_passed;
    }
    verdicts
}

/// Full judged report of one benchmark invocation, serialized as
/// `verdict.json` and rendered into `results.md`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub params: JudgeParams,
    pub outcomes: Vec<TestOutcome>,
    pub verdicts: Vec<MetricVerdict>,
    pub all_certified: bool,
}

impl RunReport {
    /// Judges a set of runs into a report.
    pub fn from_runs(runs: &[TestRun], params: &JudgeParams, seed: u64) -> Result<Self> {
        let mut outcomes = Vec::new();
        for run in runs {
            outcomes.extend(judge_run(run, params)?);
        }
        let verdicts = certify(&outcomes);
        let all_certified = !verdicts.is_empty() && verdicts.iter().all(|v| v.certified);
        Ok(Self {
            seed,
            params: *params,
            outcomes,
            verdicts,
            all_certified,
        })
    }

    /// Renders the report as a human-readable markdown summary.
    pub fn render_markdown(&self) -> String {
        let mut out = String::new();
        out.push_str("# Metric stability benchmark results\n\n");
        out.push_str(&format!(
            "Seed {} · alpha {} · stability tolerance {} · noise threshold {}\n\n",
            self.seed, self.params.alpha, self.params.pet_tolerance, self.params.rot_threshold
        ));
        for test in TestKind::ALL {
            let rows: Vec<&TestOutcome> = self.outcomes.iter().filter(|o| o.test == test).collect();
            if rows.is_empty() {
                continue;
            }
            let title = match test {
                TestKind::PerfectExplanation => "Perfect-explanation test",
                TestKind::RandomOutput => "Random-output test",
            };
            let level = 100.0 * (1.0 - self.params.alpha);
            out.push_str(&format!("## {title}\n\n"));
            out.push_str(&format!(
                "| metric | mode | epsilon | samples | instances | expected | actual | {level}% CI | result |\n"
            ));
            out.push_str("|---|---|---|---|---|---|---|---|---|\n");
            for o in rows {
                out.push_str(&format!(
                    "| {} | {} | {} | {} | {} | {:.3} | {:.3} ± {:.3} | ({:.3}, {:.3}) | {} |\n",
                    o.metric,
                    o.mode,
                    o.epsilon,
                    o.n_samples,
                    o.n_instances,
                    o.expected,
                    o.mean,
                    o.std,
                    o.ci_low,
                    o.ci_high,
                    if o.passed { "pass" } else { "FAIL" },
                ));
            }
            out.push('\n');
        }
        out.push_str("## Certification\n\n");
        out.push_str("| metric | mode | stable run | noise run | certified |\n");
        out.push_str("|---|---|---|---|---|\n");
        for v in &self.verdicts {
            out.push_str(&format!(
                "| {} | {} | {} | {} | {} |\n",
                v.metric,
                v.mode,
                if v.perfect_explanation_passed {
                    "pass"
                } else {
                    "FAIL"
                },
                if v.random_output_passed {
                    "pass"
                } else {
                    "FAIL"
                },
                if v.certified { "yes" } else { "no" },
            ));
        }
        out.push('\n');
        out.push_str(if self.all_certified {
            "All metric configurations certified.\n"
        } else {
            "At least one metric configuration is not certified.\n"
        });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meta::runner::MetricSeries;
    use crate::metrics::NeighborhoodSpec;

    fn run_with(test: TestKind, values: Vec<f64>) -> TestRun {
        TestRun {
            test,
            mode: MetricMode::Raw,
            neighborhood: NeighborhoodSpec::default(),
            n_instances: values.len(),
            series: vec![
                MetricSeries {
                    metric: MetricKind::MaxSensitivity,
                    values: values.clone(),
                },
                MetricSeries {
                    metric: MetricKind::AvgSensitivity,
                    values,
                },
            ],
        }
    }

    #[test]
    fn all_zero_stable_run_passes() {
        let run = run_with(TestKind::PerfectExplanation, vec![0.0; 40]);
        let outcomes = judge_run(&run, &JudgeParams::default()).unwrap();
        assert_eq!(outcomes.len(), 2);
        for o in outcomes {
            assert!(o.passed, "{}", o.detail);
            assert_eq!(o.mean, 0.0);
            assert_eq!((o.ci_low, o.ci_high), (0.0, 0.0));
        }
    }

    #[test]
    fn drifting_stable_run_fails_on_mean_even_if_interval_covers_zero() {
        // Wide spread centered slightly above tolerance: interval covers 0
        // but the mean is too large.
        let values: Vec<f64> = (0..40)
            .map(|i| if i % 2 == 0 { 0.05 } else { -0.04 })
            .collect();
        let run = run_with(TestKind::PerfectExplanation, values);
        let outcomes = judge_run(&run, &JudgeParams::default()).unwrap();
        for o in outcomes {
            assert!(o.ci_low <= 0.0 && 0.0 <= o.ci_high);
            assert!(o.mean > 1e-3);
            assert!(!o.passed);
            assert!(o.detail.contains("spurious instability"));
        }
    }

    #[test]
    fn noise_run_needs_its_lower_bound_above_threshold() {
        let strong = run_with(TestKind::RandomOutput, vec![22.0; 30]);
        for o in judge_run(&strong, &JudgeParams::default()).unwrap() {
            assert!(o.passed);
            assert_eq!(o.detail, "unrobust explainer detected");
        }
        let silent = run_with(TestKind::RandomOutput, vec![0.0; 30]);
        for o in judge_run(&silent, &JudgeParams::default()).unwrap() {
            assert!(!o.passed);
            assert!(o.detail.contains("unrobustness missed"));
        }
    }

    #[test]
    fn certification_requires_both_tests_to_pass() {
        let runs = [
            run_with(TestKind::PerfectExplanation, vec![0.0; 30]),
            run_with(TestKind::RandomOutput, vec![0.0; 30]),
        ];
        let report = RunReport::from_runs(&runs, &JudgeParams::default(), 7).unwrap();
        assert_eq!(report.verdicts.len(), 2);
        for v in &report.verdicts {
            assert!(v.perfect_explanation_passed);
            assert!(!v.random_output_passed);
            assert!(!v.certified);
        }
        assert!(!report.all_certified);

        let good = [
            run_with(TestKind::PerfectExplanation, vec![0.0; 30]),
            run_with(TestKind::RandomOutput, vec![22.0; 30]),
        ];
        let report = RunReport::from_runs(&good, &JudgeParams::default(), 7).unwrap();
        assert!(report.all_certified);
    }

    #[test]
    fn missing_test_cell_blocks_certification() {
        let runs = [run_with(TestKind::PerfectExplanation, vec![0.0; 30])];
        let report = RunReport::from_runs(&runs, &JudgeParams::default(), 7).unwrap();
        assert!(!report.all_certified);
        assert!(report
            .verdicts
            .iter()
            .all(|v| !v.random_output_passed && !v.certified));
    }

    #[test]
    fn report_round_trips_through_json_exactly() {
        let runs = [
            run_with(TestKind::PerfectExplanation, vec![0.0, 0.0, 0.0]),
            run_with(TestKind::RandomOutput, vec![21.9, 22.3, 22.1]),
        ];
        let report = RunReport::from_runs(&runs, &JudgeParams::default(), 3).unwrap();
        let json = serde_json::to_string_pretty(&report).unwrap();
        let back: RunReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
        let again = serde_json::to_string_pretty(&back).unwrap();
        assert_eq!(json, again);
    }

    #[test]
    fn markdown_report_lists_every_cell_and_the_overall_line() {
        let runs = [
            run_with(TestKind::PerfectExplanation, vec![0.0; 5]),
            run_with(TestKind::RandomOutput, vec![22.0; 5]),
        ];
        let report = RunReport::from_runs(&runs, &JudgeParams::default(), 11).unwrap();
        let md = report.render_markdown();
        assert!(md.contains("Perfect-explanation test"));
        assert!(md.contains("Random-output test"));
        assert!(md.contains("| max_sens | raw |"));
        assert!(md.contains("| avg_sens | raw |"));
        assert!(md.contains("22.000"));
        assert!(md.contains("All metric configurations certified."));
    }

    #[test]
    fn invalid_params_are_rejected() {
        let run = run_with(TestKind::PerfectExplanation, vec![0.0; 5]);
        let bad = JudgeParams {
            alpha: 0.0,
            ..JudgeParams::default()
        };
        assert!(judge_run(&run, &bad).is_err());
        let bad = JudgeParams {
            rot_threshold: f64::NAN,
            ..JudgeParams::default()
        };
        assert!(judge_run(&run, &bad).is_err());
    }
}
