//! Experiment plans: a declarative grid of streams × algorithms ×
//! hyperparameters that expands into individually fingerprinted runs,
//! executes them on a worker pool, and writes per-run reports plus
//! aggregate comparison matrices. The fingerprint is a stable hash of the
//! run's canonical configuration string, so rerunning a plan reproduces
//! the same file names and pairings.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::Deserialize;

use crate::boost::BoostConfig;
use crate::eval::{
    compare_algorithms, prequential_run, ComparisonOutcome, Metric, MonotonicClock, RunReport,
};
use crate::policy::GrowthPolicy;
use crate::predict::PredictorKind;
use crate::stream::{open_csv_stream, GeneratorConfig, InstanceStream, Schema, StreamError};
use crate::tree::TreeConfig;

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error("plan parse error: {0}")]
    Parse(String),
    #[error("invalid plan: {0}")]
    Invalid(String),
    #[error("duplicate runs: {0}")]
    Duplicates(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Stream(#[from] StreamError),
}

/// Where instances come from: a synthetic generator or a CSV file with a
/// schema sidecar (or an explicit schema file).
#[derive(Debug, Clone, PartialEq)]
pub enum StreamSpec {
    Generator(GeneratorConfig),
    Csv {
        path: String,
        schema: Option<String>,
    },
}

impl StreamSpec {
    /// Parses a compact spec: either a generator spec such as
    /// `sea:seed=1,length=100000` or `csv:path=data.csv` with an optional
    /// `schema=file` parameter (paths must not contain commas).
    pub fn parse(spec: &str) -> Result<StreamSpec, StreamError> {
        match spec.strip_prefix("csv:") {
            None => Ok(StreamSpec::Generator(GeneratorConfig::parse(spec)?)),
            Some(rest) => {
                let mut path = None;
                let mut schema = None;
                for part in rest.split(',').filter(|p| !p.is_empty()) {
                    match part.split_once('=') {
                        Some(("path", v)) if path.is_none() => path = Some(v.to_string()),
                        Some(("schema", v)) if schema.is_none() => schema = Some(v.to_string()),
                        Some((k, _)) => {
                            return Err(StreamError::Config(format!(
                                "bad or repeated csv parameter {k:?}"
                            )))
                        }
                        None => {
                            return Err(StreamError::Config(format!(
                                "csv parameter {part:?} is not key=value"
                            )))
                        }
                    }
                }
                let path = path.ok_or_else(|| {
                    StreamError::Config("csv spec requires path=<file>".to_string())
                })?;
                Ok(StreamSpec::Csv { path, schema })
            }
        }
    }

    pub fn canonical(&self) -> String {
        match self {
            StreamSpec::Generator(config) => config.canonical(),
            StreamSpec::Csv { path, schema } => match schema {
                Some(schema) => format!("csv:path={path},schema={schema}"),
                None => format!("csv:path={path}"),
            },
        }
    }

    /// Instance count when it is known ahead of time.
    pub fn length(&self) -> Option<u64> {
        match self {
            StreamSpec::Generator(config) => Some(config.length()),
            StreamSpec::Csv { .. } => None,
        }
    }

    pub fn open(&self) -> Result<Box<dyn InstanceStream>, StreamError> {
        match self {
            StreamSpec::Generator(config) => Ok(Box::new(config.open())),
            StreamSpec::Csv { path, schema } => {
                let schema = match schema {
                    None => None,
                    Some(schema_path) => {
                        let text = std::fs::read_to_string(schema_path).map_err(|source| {
                            StreamError::Io {
                                path: PathBuf::from(schema_path),
                                source,
                            }
                        })?;
                        Some(Arc::new(Schema::parse(&text)?))
                    }
                };
                Ok(Box::new(open_csv_stream(path, schema)?))
            }
        }
    }
}

/// A growth policy with or without the boosted leaf predictor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlgoSpec {
    pub policy: GrowthPolicy,
    pub olboost: bool,
}

impl AlgoSpec {
    /// Parses `vfdt`, `svfdt1`, `svfdt2`, optionally with `+olboost`.
    pub fn parse(spec: &str) -> Result<AlgoSpec, PlanError> {
        let (policy_name, olboost) = match spec.split_once('+') {
            None => (spec, false),
            Some((p, "olboost")) => (p, true),
            Some((_, suffix)) => {
                return Err(PlanError::Invalid(format!(
                    "unknown algorithm suffix {suffix:?} in {spec:?}"
                )))
            }
        };
        let policy = GrowthPolicy::parse(policy_name).ok_or_else(|| {
            PlanError::Invalid(format!("unknown growth policy {policy_name:?} in {spec:?}"))
        })?;
        Ok(AlgoSpec { policy, olboost })
    }

    pub fn name(&self) -> String {
        if self.olboost {
            format!("{}+olboost", self.policy.name())
        } else {
            self.policy.name().to_string()
        }
    }
}

/// One fully resolved run: a point in the plan's grid.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub stream: StreamSpec,
    pub algorithm: AlgoSpec,
    pub grace_period: u64,
    pub tie_threshold: f64,
    pub seed: u64,
    pub delta: f64,
    pub predictor: PredictorKind,
    pub min_lambda: f64,
    pub max_lambda: f64,
    pub window: usize,
}

impl RunSpec {
    pub fn tree_config(&self) -> TreeConfig {
        TreeConfig {
            grace_period: self.grace_period,
            tie_threshold: self.tie_threshold,
            delta: self.delta,
            predictor: self.predictor,
            policy: self.algorithm.policy,
            boost: self.algorithm.olboost.then_some(BoostConfig {
                min_lambda: self.min_lambda,
                max_lambda: self.max_lambda,
            }),
            seed: self.seed,
        }
    }

    /// Canonical configuration string; the boost rate bounds appear only
    /// when boosting is on, so a plain run's canonical form is identical
    /// to a boosted run's base form.
    pub fn canonical(&self) -> String {
        self.canonical_for(self.algorithm)
    }

    /// Canonical form with boosting stripped; shared between a boosted run
    /// and its plain counterpart.
    pub fn base_canonical(&self) -> String {
        self.canonical_for(AlgoSpec {
            policy: self.algorithm.policy,
            olboost: false,
        })
    }

    fn canonical_for(&self, algorithm: AlgoSpec) -> String {
        let mut out = format!(
            "algo={}|delta={}|gp={}",
            algorithm.name(),
            self.delta,
            self.grace_period
        );
        if algorithm.olboost {
            out.push_str(&format!(
                "|max_lambda={}|min_lambda={}",
                self.max_lambda, self.min_lambda
            ));
        }
        out.push_str(&format!(
            "|predictor={}|seed={}|stream={}|tau={}|window={}",
            self.predictor.name(),
            self.seed,
            self.stream.canonical(),
            self.tie_threshold,
            self.window
        ));
        out
    }

    pub fn fingerprint(&self) -> String {
        format!("{:016x}", fnv1a64(&self.canonical()))
    }

    pub fn base_fingerprint(&self) -> String {
        format!("{:016x}", fnv1a64(&self.base_canonical()))
    }
}

fn fnv1a64(s: &str) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for byte in s.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// The whole experiment: the grid, the shared parameters, and the output
/// location. Expand with [`ExperimentPlan::runs`], execute with
/// [`ExperimentPlan::run_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub streams: Vec<StreamSpec>,
    pub algorithms: Vec<AlgoSpec>,
    pub grace_periods: Vec<u64>,
    pub tie_thresholds: Vec<f64>,
    pub seeds: Vec<u64>,
    pub delta: f64,
    pub predictor: PredictorKind,
    pub min_lambda: f64,
    pub max_lambda: f64,
    pub window: usize,
    pub alpha: f64,
    pub out_dir: PathBuf,
    /// Worker threads; 0 means one per available core.
    pub jobs: usize,
}

impl Default for ExperimentPlan {
    fn default() -> ExperimentPlan {
        ExperimentPlan {
            streams: Vec::new(),
            algorithms: vec![AlgoSpec {
                policy: GrowthPolicy::Vfdt,
                olboost: false,
            }],
            grace_periods: vec![200],
            tie_thresholds: vec![0.05],
            seeds: vec![1],
            delta: 1e-7,
            predictor: PredictorKind::AdaptiveNaiveBayes,
            min_lambda: 1.0,
            max_lambda: 12.0,
            window: 1000,
            alpha: 0.05,
            out_dir: PathBuf::from("streamdt-out"),
            jobs: 0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    streams: Option<Vec<String>>,
    algorithms: Option<Vec<String>>,
    #[serde(default)]
    grid: GridSection,
    #[serde(default)]
    params: ParamsSection,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    grace_periods: Option<Vec<u64>>,
    tie_thresholds: Option<Vec<f64>>,
    seeds: Option<Vec<u64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsSection {
    delta: Option<f64>,
    predictor: Option<String>,
    min_lambda: Option<f64>,
    max_lambda: Option<f64>,
    window: Option<usize>,
    alpha: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    dir: Option<String>,
    jobs: Option<usize>,
}

impl ExperimentPlan {
    /// Reads a plan from TOML text. Absent fields keep their defaults so a
    /// plan file only has to state what it cares about.
    pub fn from_toml(text: &str) -> Result<ExperimentPlan, PlanError> {
        ExperimentPlan::from_toml_onto(text, ExperimentPlan::default())
    }

    /// Like [`ExperimentPlan::from_toml`], but fields the file leaves out
    /// keep the values from `plan` instead of the built-in defaults.
    pub fn from_toml_onto(
        text: &str,
        mut plan: ExperimentPlan,
    ) -> Result<ExperimentPlan, PlanError> {
        let file: PlanFile = toml::from_str(text).map_err(|e| PlanError::Parse(e.to_string()))?;
        if let Some(streams) = file.streams {
            plan.streams = streams
                .iter()
                .map(|s| StreamSpec::parse(s))
                .collect::<Result<_, _>>()?;
        }
        if let Some(algorithms) = file.algorithms {
            plan.algorithms = algorithms
                .iter()
                .map(|s| AlgoSpec::parse(s))
                .collect::<Result<_, _>>()?;
        }
        if let Some(v) = file.grid.grace_periods {
            plan.grace_periods = v;
        }
        if let Some(v) = file.grid.tie_thresholds {
            plan.tie_thresholds = v;
        }
        if let Some(v) = file.grid.seeds {
            plan.seeds = v;
        }
        if let Some(v) = file.params.delta {
            plan.delta = v;
        }
        if let Some(name) = file.params.predictor {
            plan.predictor = PredictorKind::parse(&name).ok_or_else(|| {
                PlanError::Invalid(format!("unknown predictor {name:?} in params.predictor"))
            })?;
        }
        if let Some(v) = file.params.min_lambda {
            plan.min_lambda = v;
        }
        if let Some(v) = file.params.max_lambda {
            plan.max_lambda = v;
        }
        if let Some(v) = file.params.window {
            plan.window = v;
        }
        if let Some(v) = file.params.alpha {
            plan.alpha = v;
        }
        if let Some(v) = file.output.dir {
            plan.out_dir = PathBuf::from(v);
        }
        if let Some(v) = file.output.jobs {
            plan.jobs = v;
        }
        Ok(plan)
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        let invalid = |msg: String| Err(PlanError::Invalid(msg));
        if self.streams.is_empty() {
            return invalid("streams list is empty".into());
        }
        if self.algorithms.is_empty() {
            return invalid("algorithms list is empty".into());
        }
        if self.grace_periods.is_empty() {
            return invalid("grid.grace_periods is empty".into());
        }
        if self.tie_thresholds.is_empty() {
            return invalid("grid.tie_thresholds is empty".into());
        }
        if self.seeds.is_empty() {
            return invalid("grid.seeds is empty".into());
        }
        for spec in self.runs() {
            spec.tree_config()
                .validate()
                .map_err(|e| PlanError::Invalid(format!("run {}: {e}", spec.canonical())))?;
        }
        if self.window == 0 {
            return invalid("params.window must be >= 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return invalid(format!(
                "params.alpha must be in (0, 1), got {}",
                self.alpha
            ));
        }
        let mut seen: BTreeMap<String, String> = BTreeMap::new();
        let mut duplicates = Vec::new();
        for spec in self.runs() {
            if seen.insert(spec.fingerprint(), spec.canonical()).is_some() {
                duplicates.push(spec.canonical());
            }
        }
        if !duplicates.is_empty() {
            return Err(PlanError::Duplicates(duplicates.join("; ")));
        }
        Ok(())
    }

    /// Expands the grid into runs, ordered by stream, then algorithm, then
    /// grace period, tie threshold, and seed.
    pub fn runs(&self) -> Vec<RunSpec> {
        let mut runs = Vec::new();
        for stream in &self.streams {
            for algorithm in &self.algorithms {
                for &grace_period in &self.grace_periods {
                    for &tie_threshold in &self.tie_thresholds {
                        for &seed in &self.seeds {
                            runs.push(RunSpec {
                                stream: stream.clone(),
                                algorithm: *algorithm,
                                grace_period,
                                tie_threshold,
                                seed,
                                delta: self.delta,
                                predictor: self.predictor,
                                min_lambda: self.min_lambda,
                                max_lambda: self.max_lambda,
                                window: self.window,
                            });
                        }
                    }
                }
            }
        }
        runs
    }

    /// Dry-run listing: one line per run, nothing executed or written.
    pub fn describe(&self) -> Result<String, PlanError> {
        self.validate()?;
        let mut out = String::new();
        let runs = self.runs();
        for spec in &runs {
            let length = match spec.stream.length() {
                Some(n) => format!("{n} instances"),
                None => "length unknown".to_string(),
            };
            out.push_str(&format!(
                "{} {} ({length})\n",
                spec.fingerprint(),
                spec.canonical()
            ));
        }
        out.push_str(&format!("total: {} runs\n", runs.len()));
        Ok(out)
    }

    /// Executes every run on a worker pool and writes the output files:
    /// `run_<fingerprint>.json` per run, `runs.csv` across runs, and one
    /// `comparison_<metric>.csv` per metric when at least two algorithms
    /// completed without failures. Failed runs are collected into
    /// `failures.json` instead of aborting the batch.
    pub fn run_experiment(&self) -> Result<ExperimentSummary, PlanError> {
        self.validate()?;
        std::fs::create_dir_all(&self.out_dir).map_err(|source| PlanError::Io {
            path: self.out_dir.clone(),
            source,
        })?;
        let specs = self.runs();
        let jobs = self.effective_jobs(specs.len());

        let next = Mutex::new(0usize);
        let slots: Vec<Mutex<Option<Result<RunReport, String>>>> =
            specs.iter().map(|_| Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(|| loop {
                    let index = {
                        let mut n = next.lock().unwrap();
                        if *n >= specs.len() {
                            break;
                        }
                        let i = *n;
                        *n += 1;
                        i
                    };
                    let outcome = execute_run(&specs[index]);
                    *slots[index].lock().unwrap() = Some(outcome);
                });
            }
        });

        let mut reports = Vec::new();
        let mut failures = Vec::new();
        for (spec, slot) in specs.iter().zip(slots) {
            match slot.into_inner().unwrap().expect("every run was executed") {
                Ok(report) => reports.push(report),
                Err(error) => failures.push(RunFailure {
                    fingerprint: spec.fingerprint(),
                    canonical: spec.canonical(),
                    error,
                }),
            }
        }

        for report in &reports {
            let path = self
                .out_dir
                .join(format!("run_{}.json", report.fingerprint));
            let body =
                serde_json::to_string_pretty(report).expect("report serialization is infallible");
            std::fs::write(&path, body).map_err(|source| PlanError::Io { path, source })?;
        }
        self.write_runs_csv(&reports)?;
        if !failures.is_empty() {
            let path = self.out_dir.join("failures.json");
            let body = serde_json::to_string_pretty(&failures)
                .expect("failure serialization is infallible");
            std::fs::write(&path, body).map_err(|source| PlanError::Io { path, source })?;
        }

        let mut comparisons = Vec::new();
        if failures.is_empty() && self.algorithms.len() >= 2 {
            for metric in [Metric::Accuracy, Metric::SizeBytes, Metric::Elapsed] {
                let outcome = compare_algorithms(&reports, metric, self.alpha)
                    .map_err(|e| PlanError::Invalid(format!("comparison failed: {e}")))?;
                write_comparison_csv(&self.out_dir, &outcome)?;
                comparisons.push(outcome);
            }
        }

        Ok(ExperimentSummary {
            reports,
            failures,
            comparisons,
            out_dir: self.out_dir.clone(),
        })
    }

    fn effective_jobs(&self, runs: usize) -> usize {
        let jobs = if self.jobs > 0 {
            self.jobs
        } else {
            std::thread::available_parallelism()
                .map(usize::from)
                .unwrap_or(1)
        };
        jobs.clamp(1, runs.max(1))
    }

    fn write_runs_csv(&self, reports: &[RunReport]) -> Result<(), PlanError> {
        let path = self.out_dir.join("runs.csv");
        let io_err = |source: std::io::Error| PlanError::Io {
            path: path.clone(),
            source,
        };
        let mut writer = csv::Writer::from_path(&path).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => io_err(source),
            other => PlanError::Invalid(format!("csv: {other:?}")),
        })?;
        writer
            .write_record([
                "fingerprint",
                "base_fingerprint",
                "stream",
                "algorithm",
                "policy",
                "olboost",
                "predictor",
                "grace_period",
                "tie_threshold",
                "delta",
                "min_lambda",
                "max_lambda",
                "seed",
                "window",
                "instances",
                "correct",
                "accuracy",
                "elapsed_seconds",
                "node_count",
                "leaf_count",
                "depth",
                "size_bytes",
            ])
            .map_err(|e| PlanError::Invalid(format!("csv: {e}")))?;
        for r in reports {
            let optional = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            writer
                .write_record([
                    r.fingerprint.clone(),
                    r.base_fingerprint.clone(),
                    r.stream.clone(),
                    r.algorithm.clone(),
                    r.policy.clone(),
                    r.olboost.to_string(),
                    r.predictor.clone(),
                    r.grace_period.to_string(),
                    r.tie_threshold.to_string(),
                    r.delta.to_string(),
                    optional(r.min_lambda),
                    optional(r.max_lambda),
                    r.seed.to_string(),
                    r.window.to_string(),
                    r.instances.to_string(),
                    r.correct.to_string(),
                    r.accuracy.to_string(),
                    r.elapsed_seconds.to_string(),
                    r.node_count.to_string(),
                    r.leaf_count.to_string(),
                    r.depth.to_string(),
                    r.size_bytes.to_string(),
                ])
                .map_err(|e| PlanError::Invalid(format!("csv: {e}")))?;
        }
        writer.flush().map_err(io_err)?;
        Ok(())
    }
}

/// Writes a win-count matrix as `comparison_<metric>.csv` under `dir`:
/// header row of algorithm names, one row per algorithm, `--` on the
/// diagonal. Returns the written path.
pub fn write_comparison_csv(dir: &Path, outcome: &ComparisonOutcome) -> Result<PathBuf, PlanError> {
    let path = dir.join(format!("comparison_{}.csv", outcome.metric.name()));
    let mut writer = csv::Writer::from_path(&path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => PlanError::Io {
            path: path.clone(),
            source,
        },
        other => PlanError::Invalid(format!("csv: {other:?}")),
    })?;
    let mut header = vec!["algorithm".to_string()];
    header.extend(outcome.algorithms.iter().cloned());
    writer
        .write_record(&header)
        .map_err(|e| PlanError::Invalid(format!("csv: {e}")))?;
    for (i, algorithm) in outcome.algorithms.iter().enumerate() {
        let mut row = vec![algorithm.clone()];
        for j in 0..outcome.algorithms.len() {
            row.push(if i == j {
                "--".to_string()
            } else {
                outcome.wins[i][j].to_string()
            });
        }
        writer
            .write_record(&row)
            .map_err(|e| PlanError::Invalid(format!("csv: {e}")))?;
    }
    writer.flush().map_err(|source| PlanError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// One run that could not complete, kept alongside the runs that did.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RunFailure {
    pub fingerprint: String,
    pub canonical: String,
    pub error: String,
}

pub struct ExperimentSummary {
    pub reports: Vec<RunReport>,
    pub failures: Vec<RunFailure>,
    pub comparisons: Vec<ComparisonOutcome>,
    pub out_dir: PathBuf,
}

fn execute_run(spec: &RunSpec) -> Result<RunReport, String> {
    let mut stream = spec.stream.open().map_err(|e| e.to_string())?;
    let mut clock = MonotonicClock::new();
    let outcome = prequential_run(stream.as_mut(), spec.tree_config(), spec.window, &mut clock)
        .map_err(|e| e.to_string())?;
    Ok(RunReport {
        fingerprint: spec.fingerprint(),
        base_fingerprint: spec.base_fingerprint(),
        stream: spec.stream.canonical(),
        algorithm: spec.algorithm.name(),
        policy: spec.algorithm.policy.name().to_string(),
        olboost: spec.algorithm.olboost,
        predictor: spec.predictor.name().to_string(),
        grace_period: spec.grace_period,
        tie_threshold: spec.tie_threshold,
        delta: spec.delta,
        min_lambda: spec.algorithm.olboost.then_some(spec.min_lambda),
        max_lambda: spec.algorithm.olboost.then_some(spec.max_lambda),
        seed: spec.seed,
        window: spec.window,
        instances: outcome.instances,
        correct: outcome.correct,
        accuracy: outcome.accuracy,
        elapsed_seconds: outcome.elapsed_seconds,
        node_count: outcome.model.node_count,
        leaf_count: outcome.model.leaf_count,
        depth: outcome.model.depth,
        size_bytes: outcome.model.size_bytes,
        window_accuracies: outcome.window_accuracies,
    })
}

/// Loads every `run_*.json` report under `dir`, in lexicographic file
/// order, for re-aggregation.
pub fn load_reports(dir: &Path) -> Result<Vec<RunReport>, PlanError> {
    let entries = std::fs::read_dir(dir).map_err(|source| PlanError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|path| {
            path.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("run_") && n.ends_with(".json"))
        })
        .collect();
    paths.sort();
    let mut reports = Vec::with_capacity(paths.len());
    for path in paths {
        let text = std::fs::read_to_string(&path).map_err(|source| PlanError::Io {
            path: path.clone(),
            source,
        })?;
        let report: RunReport = serde_json::from_str(&text)
            .map_err(|e| PlanError::Parse(format!("{}: {e}", path.display())))?;
        reports.push(report);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sea(seed: u64, length: u64) -> StreamSpec {
        StreamSpec::parse(&format!("sea:seed={seed},length={length}")).unwrap()
    }

    fn small_plan(dir: &Path) -> ExperimentPlan {
        ExperimentPlan {
            streams: vec![sea(1, 2000)],
            algorithms: vec![
                AlgoSpec::parse("vfdt").unwrap(),
                AlgoSpec::parse("vfdt+olboost").unwrap(),
            ],
            grace_periods: vec![100],
            tie_thresholds: vec![0.05],
            seeds: vec![1, 2, 3, 4, 5, 6],
            out_dir: dir.to_path_buf(),
            jobs: 3,
            ..ExperimentPlan::default()
        }
    }

    #[test]
    fn toml_plans_override_only_what_they_state() {
        let plan = ExperimentPlan::from_toml(
            r#"
streams = ["sea:seed=3", "led:noise=0.1"]
algorithms = ["svfdt1", "svfdt1+olboost"]

[grid]
grace_periods = [100, 200]
seeds = [7]

[params]
predictor = "nb"
alpha = 0.01

[output]
dir = "results"
jobs = 4
"#,
        )
        .unwrap();
        assert_eq!(plan.streams.len(), 2);
        assert_eq!(plan.algorithms[1].name(), "svfdt1+olboost");
        assert_eq!(plan.grace_periods, vec![100, 200]);
        assert_eq!(plan.tie_thresholds, vec![0.05]);
        assert_eq!(plan.seeds, vec![7]);
        assert_eq!(plan.predictor, PredictorKind::NaiveBayes);
        assert_eq!(plan.delta, 1e-7);
        assert_eq!(plan.alpha, 0.01);
        assert_eq!(plan.out_dir, PathBuf::from("results"));
        assert_eq!(plan.jobs, 4);
        assert_eq!(plan.runs().len(), 2 * 2 * 2);
    }

    #[test]
    fn unknown_plan_fields_are_rejected() {
        let err = ExperimentPlan::from_toml("streamz = [\"sea\"]").unwrap_err();
        assert!(matches!(err, PlanError::Parse(_)));
        let err = ExperimentPlan::from_toml("[params]\ngrace = 5").unwrap_err();
        assert!(matches!(err, PlanError::Parse(_)));
    }

    #[test]
    fn validation_rejects_empty_sections_and_duplicates() {
        let mut plan = ExperimentPlan::default();
        assert!(matches!(plan.validate(), Err(PlanError::Invalid(_))));
        plan.streams = vec![sea(1, 1000), sea(1, 1000)];
        let err = plan.validate().unwrap_err();
        match err {
            PlanError::Duplicates(msg) => assert!(msg.contains("sea:"), "{msg}"),
            other => panic!("expected Duplicates, got {other:?}"),
        }
        plan.streams = vec![sea(1, 1000)];
        plan.algorithms.clear();
        assert!(matches!(plan.validate(), Err(PlanError::Invalid(_))));
    }

    #[test]
    fn fingerprints_pair_boosted_runs_with_their_counterparts() {
        let plan = ExperimentPlan {
            streams: vec![sea(1, 1000)],
            algorithms: vec![
                AlgoSpec::parse("vfdt").unwrap(),
                AlgoSpec::parse("vfdt+olboost").unwrap(),
            ],
            ..ExperimentPlan::default()
        };
        let runs = plan.runs();
        assert_eq!(runs.len(), 2);
        let plain = &runs[0];
        let boosted = &runs[1];
        assert!(!plain.algorithm.olboost);
        assert!(boosted.algorithm.olboost);
        assert_eq!(boosted.base_fingerprint(), plain.fingerprint());
        assert_eq!(plain.base_fingerprint(), plain.fingerprint());
        assert_ne!(boosted.fingerprint(), plain.fingerprint());
        assert!(!plain.canonical().contains("lambda"));
        assert!(boosted.canonical().contains("max_lambda=12"));
    }

    #[test]
    fn fingerprints_react_to_every_grid_axis() {
        let base = ExperimentPlan {
            streams: vec![sea(1, 1000)],
            ..ExperimentPlan::default()
        };
        let fp = |plan: &ExperimentPlan| plan.runs()[0].fingerprint();
        let original = fp(&base);
        let mut changed = base.clone();
        changed.grace_periods = vec![400];
        assert_ne!(fp(&changed), original);
        changed = base.clone();
        changed.tie_thresholds = vec![0.2];
        assert_ne!(fp(&changed), original);
        changed = base.clone();
        changed.seeds = vec![9];
        assert_ne!(fp(&changed), original);
        changed = base.clone();
        changed.streams = vec![sea(2, 1000)];
        assert_ne!(fp(&changed), original);
    }

    #[test]
    fn stream_specs_parse_generators_and_csv() {
        let spec = StreamSpec::parse("csv:path=data.csv,schema=data.schema").unwrap();
        assert_eq!(
            spec,
            StreamSpec::Csv {
                path: "data.csv".to_string(),
                schema: Some("data.schema".to_string())
            }
        );
        assert_eq!(spec.canonical(), "csv:path=data.csv,schema=data.schema");
        assert_eq!(spec.length(), None);

        let generator = StreamSpec::parse("led:noise=0.2,length=5000").unwrap();
        assert_eq!(generator.length(), Some(5000));
        assert!(generator.canonical().starts_with("led:"));

        assert!(StreamSpec::parse("csv:schema=only.schema").is_err());
        assert!(StreamSpec::parse("csv:path=a.csv,path=b.csv").is_err());
        assert!(StreamSpec::parse("warp:speed=9").is_err());
    }

    #[test]
    fn algo_specs_round_trip() {
        for name in ["vfdt", "svfdt1", "svfdt2", "vfdt+olboost", "svfdt2+olboost"] {
            assert_eq!(AlgoSpec::parse(name).unwrap().name(), name);
        }
        assert!(AlgoSpec::parse("vfdt+turbo").is_err());
        assert!(AlgoSpec::parse("cart").is_err());
    }

    #[test]
    fn describe_lists_runs_without_writing() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("never-created");
        let mut plan = small_plan(&out);
        plan.seeds = vec![1];
        let listing = plan.describe().unwrap();
        assert_eq!(listing.lines().count(), 3);
        assert!(listing.contains("2000 instances"));
        assert!(listing.contains("total: 2 runs"));
        assert!(!out.exists());
    }

    #[test]
    fn experiments_write_reports_and_matrices() {
        let dir = tempfile::tempdir().unwrap();
        let plan = small_plan(dir.path());
        let summary = plan.run_experiment().unwrap();
        assert_eq!(summary.reports.len(), 12);
        assert!(summary.failures.is_empty());
        assert_eq!(summary.comparisons.len(), 3);
        for report in &summary.reports {
            assert!(dir
                .path()
                .join(format!("run_{}.json", report.fingerprint))
                .exists());
            assert_eq!(report.instances, 2000);
        }
        assert!(dir.path().join("runs.csv").exists());
        for metric in ["accuracy", "size", "time"] {
            assert!(dir.path().join(format!("comparison_{metric}.csv")).exists());
        }
        assert!(!dir.path().join("failures.json").exists());

        // Reports come back in grid order regardless of worker scheduling.
        let expected: Vec<String> = plan.runs().iter().map(|s| s.fingerprint()).collect();
        let actual: Vec<String> = summary
            .reports
            .iter()
            .map(|r| r.fingerprint.clone())
            .collect();
        assert_eq!(actual, expected);

        let loaded = load_reports(dir.path()).unwrap();
        assert_eq!(loaded.len(), 12);
    }

    #[test]
    fn reruns_reproduce_everything_but_timing() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let mut plan = small_plan(dir_a.path());
        plan.seeds = vec![1, 2];
        let first = plan.run_experiment().unwrap();
        plan.out_dir = dir_b.path().to_path_buf();
        let second = plan.run_experiment().unwrap();
        for (a, b) in first.reports.iter().zip(&second.reports) {
            let mut a = a.clone();
            let mut b = b.clone();
            a.elapsed_seconds = 0.0;
            b.elapsed_seconds = 0.0;
            assert_eq!(a, b);
        }
    }

    #[test]
    fn failed_runs_land_in_the_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut plan = small_plan(dir.path());
        plan.seeds = vec![1];
        plan.streams.push(StreamSpec::Csv {
            path: dir
                .path()
                .join("missing.csv")
                .to_string_lossy()
                .into_owned(),
            schema: None,
        });
        let summary = plan.run_experiment().unwrap();
        assert_eq!(summary.reports.len(), 2);
        assert_eq!(summary.failures.len(), 2);
        assert!(summary.comparisons.is_empty());
        assert!(dir.path().join("failures.json").exists());
        for failure in &summary.failures {
            assert!(failure.error.contains("missing.csv"), "{}", failure.error);
        }
    }
}
