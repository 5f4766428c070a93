//! Command-line front end: configuration loading, pipeline orchestration
//! (generate → train → evaluate → report), and exit-code semantics.
//!
//! Progress goes to standard error; machine-readable results go to files
//! under `--out` (and to standard output for `report`). Exit codes: 0 when
//! the run behaved as required, 1 when the judged outcome went the other
//! way, 2 on operational errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use stabench::config::{BenchConfig, TestSelection};
use stabench::meta::MetricKind;
use stabench::metrics::MetricMode;
use stabench::pipeline;

#[derive(Parser)]
#[command(
    name = "stabench",
    version,
    about = "Meta-evaluation benchmark for attribution-stability metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// TOML configuration file; absent keys take their defaults.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Master seed, overriding the configured one.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,

    /// Directory all artifacts are read from and written to.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Worker threads for data-parallel stages (0 = one per core).
    #[arg(long, value_name = "N", default_value_t = 0)]
    threads: usize,
}

impl CommonOpts {
    fn load_config(&self) -> Result<BenchConfig> {
        let mut config = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                toml::from_str(&text)
                    .with_context(|| format!("parsing config {}", path.display()))?
            }
            None => BenchConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        stabench::parallel::init_thread_pool(self.threads);
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic scene dataset (train + validation splits).
    GenData {
        #[command(flatten)]
        common: CommonOpts,

        /// Export this many validation scenes as PNG image/heatmap pairs.
        #[arg(long, value_name = "N")]
        png: Option<usize>,
    },

    /// Fit the regression tree and record validation quality.
    Train {
        #[command(flatten)]
        common: CommonOpts,

        /// Directory holding the generated dataset (defaults to --out).
        #[arg(long, value_name = "DIR")]
        data: Option<PathBuf>,

        /// Search the full reference hyperparameter grid (720 combinations)
        /// for the lowest validation MAE instead of the configured values.
        #[arg(long)]
        grid: bool,
    },

    /// Run the meta-tests against the trained tree and judge the metrics.
    Eval {
        #[command(flatten)]
        common: CommonOpts,

        /// Directory holding the generated dataset (defaults to --out).
        #[arg(long, value_name = "DIR")]
        data: Option<PathBuf>,

        /// Tree file to evaluate (defaults to tree.json under --out).
        #[arg(long, value_name = "PATH")]
        tree: Option<PathBuf>,

        /// Judge only this metric (max_sens or avg_sens).
        #[arg(long, value_name = "NAME")]
        metric: Option<MetricKind>,

        /// Evaluate only this mode (raw, relative, or pred_filtered).
        #[arg(long, value_name = "NAME")]
        mode: Option<MetricMode>,

        /// Which meta-tests to run (pet, rot, or all).
        #[arg(long, value_name = "NAME")]
        test: Option<TestSelection>,

        /// Replication profile: succeed (exit 0) when the known reference
        /// outcome — stable run passed, noise run missed, not certified —
        /// is reproduced.
        #[arg(long)]
        replication: bool,
    },

    /// Re-render results.md (and standard output) from an existing
    /// verdict.json.
    Report {
        /// Directory containing verdict.json.
        #[arg(long, value_name = "DIR", default_value = "out")]
        out: PathBuf,
    },
}

fn cmd_gen_data(common: &CommonOpts, png: Option<usize>) -> Result<ExitCode> {
    let mut config = common.load_config()?;
    if let Some(n) = png {
        config.png_samples = n;
    }
    let summary = pipeline::generate_data(&config, &common.out)?;
    eprintln!(
        "generated {} train / {} validation scenes under {} ({} PNGs)",
        summary.n_train,
        summary.n_val,
        common.out.display(),
        summary.pngs_written
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_train(common: &CommonOpts, data: Option<&Path>, grid: bool) -> Result<ExitCode> {
    let mut config = common.load_config()?;
    if grid {
        config.train.grid_search = true;
    }
    let data_dir = data.unwrap_or(&common.out);
    let (train_samples, _) = pipeline::load_train(data_dir)?;
    let (val_samples, _) = pipeline::load_val(data_dir)?;
    let (tree, record) = pipeline::train(&config, &train_samples, &val_samples)?;

    fs::create_dir_all(&common.out)?;
    pipeline::write_tree(&tree, &common.out.join(pipeline::TREE_FILE))?;
    pipeline::write_train_record(&record, &common.out.join(pipeline::PERFORMANCE_FILE))?;

    eprintln!(
        "trained tree: {} nodes, depth {}, validation MAE {:.4}, MSE {:.4}",
        record.tree_nodes, record.tree_depth, record.mae, record.mse
    );
    if let Some(grid) = &record.grid {
        eprintln!(
            "grid search over {} combinations selected MAE {:.4} (baseline {:.4})",
            grid.n_evaluated, grid.selected_mae, grid.baseline_mae
        );
    }
    for warning in &record.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_eval(
    common: &CommonOpts,
    data: Option<&Path>,
    tree: Option<&Path>,
    metric: Option<MetricKind>,
    mode: Option<MetricMode>,
    test: Option<TestSelection>,
    replication: bool,
) -> Result<ExitCode> {
    let mut config = common.load_config()?;
    if let Some(metric) = metric {
        config.meta.metrics = vec![metric];
    }
    if let Some(mode) = mode {
        config.meta.modes = vec![mode];
    }
    if let Some(test) = test {
        config.meta.tests = test;
    }
    let data_dir = data.unwrap_or(&common.out);
    let tree_path = tree.map_or_else(|| common.out.join(pipeline::TREE_FILE), Path::to_path_buf);
    let tree = pipeline::load_tree(&tree_path)?;
    let (val_samples, _) = pipeline::load_val(data_dir)?;

    let outputs = pipeline::evaluate(&config, &tree, &val_samples, replication)?;
    pipeline::write_eval_outputs(&outputs, &common.out)?;
    eprintln!(
        "wrote {}, {}, {} under {}",
        pipeline::VERDICT_FILE,
        pipeline::RESULTS_FILE,
        pipeline::PER_INSTANCE_FILE,
        common.out.display()
    );

    let report = &outputs.document.report;
    for outcome in &report.outcomes {
        eprintln!(
            "{} {} [{}]: mean {:.3}, CI ({:.3}, {:.3}) -> {}",
            outcome.test,
            outcome.metric,
            outcome.mode,
            outcome.mean,
            outcome.ci_low,
            outcome.ci_high,
            if outcome.passed { "pass" } else { "FAIL" }
        );
    }
    if replication {
        let reproduced = outputs.document.replication_reproduced();
        eprintln!(
            "replication profile: reference outcome {}",
            if reproduced {
                "reproduced"
            } else {
                "NOT reproduced"
            }
        );
        Ok(if reproduced {
            ExitCode::SUCCESS
        } else {
            ExitCode::FAILURE
        })
    } else {
        let all_passed = report.outcomes.iter().all(|o| o.passed);
        eprintln!(
            "benchmark: {}",
            if report.all_certified {
                "all metric configurations certified"
            } else if all_passed {
                "all selected tests passed"
            } else {
                "at least one test FAILED"
            }
        );
        Ok(if all_passed {
            ExitCode::SUCCESS
        } else {
            ExitCode::FAILURE
        })
    }
}

fn cmd_report(out: &Path) -> Result<ExitCode> {
    let verdict_path = out.join(pipeline::VERDICT_FILE);
    let markdown = pipeline::render_report_from_verdict(&verdict_path)?;
    fs::write(out.join(pipeline::RESULTS_FILE), &markdown)?;
    print!("{markdown}");
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::GenData { common, png } => cmd_gen_data(common, *png),
        Command::Train { common, data, grid } => cmd_train(common, data.as_deref(), *grid),
        Command::Eval {
            common,
            data,
            tree,
            metric,
            mode,
            test,
            replication,
        } => cmd_eval(
            common,
            data.as_deref(),
            tree.as_deref(),
            *metric,
            *mode,
            *test,
            *replication,
        ),
        Command::Report { out } => cmd_report(out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
