//! `streamdt` binary: runs experiment plans, lists what a plan would do,
//! and re-aggregates comparison matrices from report files. Plans come
//! from a TOML file, flags, or both; flags override the file. The
//! `STREAMDT_OUT` environment variable supplies the default output
//! directory when neither the file nor `--out` names one.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use streamdt::eval::{compare_algorithms, ComparisonOutcome, Metric, Verdict};
use streamdt::plan::{load_reports, write_comparison_csv, AlgoSpec, ExperimentPlan, StreamSpec};
use streamdt::predict::PredictorKind;

const OUT_ENV: &str = "STREAMDT_OUT";

#[derive(Parser)]
#[command(
    name = "streamdt",
    version,
    about = "Streaming decision tree experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute every run in the plan and write reports and matrices
    Run(PlanArgs),
    /// List the runs a plan expands to, without executing anything
    Describe(PlanArgs),
    /// Recompute comparison matrices from previously written reports
    Compare(CompareArgs),
}

#[derive(Args)]
struct PlanArgs {
    /// Plan file (TOML); any flags below override its values
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Stream spec, e.g. sea:seed=1,length=100000 or csv:path=data.csv (repeatable)
    #[arg(long = "stream")]
    streams: Vec<String>,
    /// Algorithm: vfdt, svfdt1, or svfdt2, optionally +olboost (repeatable)
    #[arg(long = "algo")]
    algos: Vec<String>,
    /// Grace period (repeatable)
    #[arg(long = "gp")]
    grace_periods: Vec<u64>,
    /// Tie threshold (repeatable)
    #[arg(long = "tau")]
    tie_thresholds: Vec<f64>,
    /// Split confidence
    #[arg(long)]
    delta: Option<f64>,
    /// Leaf predictor: mc, nb, or anb
    #[arg(long)]
    predictor: Option<String>,
    /// Add the boosted leaf predictor to every listed algorithm
    #[arg(long)]
    olboost: bool,
    /// Poisson rate at predicted probability 1
    #[arg(long)]
    min_lambda: Option<f64>,
    /// Poisson rate at predicted probability 0
    #[arg(long)]
    max_lambda: Option<f64>,
    /// Stream seed (repeatable)
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 means one per core
    #[arg(long)]
    jobs: Option<usize>,
    /// Significance level for the comparison tests
    #[arg(long)]
    alpha: Option<f64>,
    /// Accuracy trajectory window, in instances
    #[arg(long)]
    window: Option<usize>,
}

#[derive(Args)]
struct CompareArgs {
    /// Directory holding run_<fingerprint>.json reports
    #[arg(long)]
    out: Option<PathBuf>,
    /// Metric to compare: accuracy, size, or time (default: all three)
    #[arg(long)]
    metric: Option<String>,
    /// Significance level
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch() -> anyhow::Result<ExitCode> {
    match Cli::parse().command {
        Command::Describe(args) => {
            let plan = build_plan(&args)?;
            print!("{}", plan.describe()?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Run(args) => run_plan(&args),
        Command::Compare(args) => compare_reports(&args),
    }
}

/// Builds the effective plan: defaults, then the environment's output
/// directory, then the plan file, then flags, each layer overriding the
/// previous one.
fn build_plan(args: &PlanArgs) -> anyhow::Result<ExperimentPlan> {
    let mut base = ExperimentPlan::default();
    if let Ok(dir) = std::env::var(OUT_ENV) {
        if !dir.is_empty() {
            base.out_dir = PathBuf::from(dir);
        }
    }
    let mut plan = match &args.plan {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading plan file {}", path.display()))?;
            ExperimentPlan::from_toml_onto(&text, base)
                .with_context(|| format!("parsing plan file {}", path.display()))?
        }
        None => base,
    };
    if !args.streams.is_empty() {
        plan.streams = args
            .streams
            .iter()
            .map(|s| StreamSpec::parse(s).with_context(|| format!("parsing --stream {s}")))
            .collect::<anyhow::Result<_>>()?;
    }
    if !args.algos.is_empty() {
        plan.algorithms = args
            .algos
            .iter()
            .map(|s| AlgoSpec::parse(s).with_context(|| format!("parsing --algo {s}")))
            .collect::<anyhow::Result<_>>()?;
    }
    if args.olboost {
        for algorithm in &mut plan.algorithms {
            algorithm.olboost = true;
        }
    }
    if !args.grace_periods.is_empty() {
        plan.grace_periods = args.grace_periods.clone();
    }
    if !args.tie_thresholds.is_empty() {
        plan.tie_thresholds = args.tie_thresholds.clone();
    }
    if !args.seeds.is_empty() {
        plan.seeds = args.seeds.clone();
    }
    if let Some(v) = args.delta {
        plan.delta = v;
    }
    if let Some(name) = &args.predictor {
        plan.predictor = PredictorKind::parse(name)
            .ok_or_else(|| anyhow::anyhow!("unknown predictor {name:?} for --predictor"))?;
    }
    if let Some(v) = args.min_lambda {
        plan.min_lambda = v;
    }
    if let Some(v) = args.max_lambda {
        plan.max_lambda = v;
    }
    if let Some(v) = args.jobs {
        plan.jobs = v;
    }
    if let Some(v) = args.alpha {
        plan.alpha = v;
    }
    if let Some(v) = args.window {
        plan.window = v;
    }
    if let Some(out) = &args.out {
        plan.out_dir = out.clone();
    }
    Ok(plan)
}

fn run_plan(args: &PlanArgs) -> anyhow::Result<ExitCode> {
    let plan = build_plan(args)?;
    let summary = plan.run_experiment()?;
    for report in &summary.reports {
        println!(
            "run {} {} on {}: accuracy={:.4} nodes={} size={}B elapsed={:.2}s",
            report.fingerprint,
            report.algorithm,
            report.stream,
            report.accuracy,
            report.node_count,
            report.size_bytes,
            report.elapsed_seconds
        );
    }
    for outcome in &summary.comparisons {
        print_matrix(outcome);
    }
    println!(
        "wrote {} reports to {}",
        summary.reports.len(),
        summary.out_dir.display()
    );
    if summary.failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for failure in &summary.failures {
            eprintln!(
                "failed {} {}: {}",
                failure.fingerprint, failure.canonical, failure.error
            );
        }
        eprintln!(
            "{} of {} runs failed; see {}",
            summary.failures.len(),
            summary.failures.len() + summary.reports.len(),
            summary.out_dir.join("failures.json").display()
        );
        Ok(ExitCode::FAILURE)
    }
}

fn compare_reports(args: &CompareArgs) -> anyhow::Result<ExitCode> {
    let dir = match &args.out {
        Some(dir) => dir.clone(),
        None => std::env::var(OUT_ENV)
            .ok()
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .unwrap_or_else(|| ExperimentPlan::default().out_dir),
    };
    let reports = load_reports(&dir)?;
    if reports.is_empty() {
        anyhow::bail!("no run_*.json reports found in {}", dir.display());
    }
    let metrics = match &args.metric {
        Some(name) => vec![Metric::parse(name)
            .ok_or_else(|| anyhow::anyhow!("unknown metric {name:?} for --metric"))?],
        None => vec![Metric::Accuracy, Metric::SizeBytes, Metric::Elapsed],
    };
    for metric in metrics {
        let outcome = compare_algorithms(&reports, metric, args.alpha)?;
        let path = write_comparison_csv(&dir, &outcome)?;
        print_matrix(&outcome);
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn print_matrix(outcome: &ComparisonOutcome) {
    let width = outcome
        .algorithms
        .iter()
        .map(|a| a.len())
        .max()
        .unwrap_or(0)
        .max("algorithm".len());
    println!(
        "comparison ({}, alpha={}): wins by row over column",
        outcome.metric.name(),
        outcome.alpha
    );
    print!("  {:width$}", "algorithm");
    for name in &outcome.algorithms {
        print!("  {name:>width$}");
    }
    println!();
    for (i, name) in outcome.algorithms.iter().enumerate() {
        print!("  {name:width$}");
        for j in 0..outcome.algorithms.len() {
            if i == j {
                print!("  {:>width$}", "--");
            } else {
                print!("  {:>width$}", outcome.wins[i][j]);
            }
        }
        println!();
    }
    for result in &outcome.results {
        let verdict = match result.verdict {
            Verdict::ABetter => format!("{} better", result.algo_a),
            Verdict::BBetter => format!("{} better", result.algo_b),
            Verdict::NoDifference => "no difference".to_string(),
        };
        println!(
            "  {}: {} vs {}: n={} two-sided p={:.4} -> {}",
            result.stream, result.algo_a, result.algo_b, result.pairs, result.two_sided_p, verdict
        );
    }
}
