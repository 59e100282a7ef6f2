//! Prequential evaluation and cross-run analysis. Every instance is first
//! scored against the current model, then used to train it, so accuracy
//! reflects honest one-pass performance. Completed runs carry a config
//! fingerprint so counterpart runs can be paired for relative-accuracy
//! ratios and Wilcoxon signed-rank win matrices.

pub mod wilcoxon;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::predict::argmax;
use crate::stream::{InstanceError, InstanceStream, StreamError};
use crate::tree::{HoeffdingTree, ModelStats, TreeConfig, TreeError};

pub use wilcoxon::{wilcoxon_signed_rank, Alternative, WilcoxonError};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("stream failed after {instances_processed} instances: {source}")]
    Stream {
        instances_processed: u64,
        #[source]
        source: StreamError,
    },
    #[error("training failed after {instances_processed} instances: {source}")]
    Train {
        instances_processed: u64,
        #[source]
        source: InstanceError,
    },
    #[error("stream produced no instances")]
    EmptyStream,
    #[error("reports are not counterparts: {0}")]
    MismatchedReports(String),
    #[error("baseline accuracy is zero; relative accuracy undefined")]
    UndefinedRatio,
    #[error("comparison grids are unpaired: {0}")]
    Unpaired(String),
    #[error(transparent)]
    Wilcoxon(#[from] WilcoxonError),
}

/// Monotonic time source, injectable so tests can observe exactly which
/// code paths are timed.
pub trait Clock {
    fn now(&mut self) -> Duration;
}

pub struct MonotonicClock {
    origin: Instant,
}

impl MonotonicClock {
    pub fn new() -> MonotonicClock {
        MonotonicClock {
            origin: Instant::now(),
        }
    }
}

impl Default for MonotonicClock {
    fn default() -> MonotonicClock {
        MonotonicClock::new()
    }
}

impl Clock for MonotonicClock {
    fn now(&mut self) -> Duration {
        self.origin.elapsed()
    }
}

/// Advances by a fixed tick on every reading.
pub struct FakeClock {
    current: Duration,
    tick: Duration,
}

impl FakeClock {
    pub fn new(tick: Duration) -> FakeClock {
        FakeClock {
            current: Duration::ZERO,
            tick,
        }
    }

    pub fn readings(&self) -> u32 {
        (self.current.as_nanos() / self.tick.as_nanos().max(1)) as u32
    }
}

impl Clock for FakeClock {
    fn now(&mut self) -> Duration {
        self.current += self.tick;
        self.current
    }
}

/// The result of one prequential pass: accuracy totals, the per-window
/// trajectory, timing, and the trained tree itself.
pub struct PrequentialOutcome {
    pub instances: u64,
    pub correct: u64,
    pub accuracy: f64,
    pub elapsed_seconds: f64,
    pub window_size: usize,
    pub window_accuracies: Vec<f64>,
    pub model: ModelStats,
    pub tree: HoeffdingTree,
}

/// Runs test-then-train over the whole stream. Each instance is predicted
/// (argmax, ties to the lowest class index), scored, and then used for
/// training. The clock brackets predict+train only, so stream decoding and
/// bookkeeping never count toward `elapsed_seconds`.
pub fn prequential_run(
    stream: &mut dyn InstanceStream,
    config: TreeConfig,
    window_size: usize,
    clock: &mut dyn Clock,
) -> Result<PrequentialOutcome, EvalError> {
    if window_size == 0 {
        return Err(EvalError::Config("window size must be >= 1".into()));
    }
    let schema = stream.schema().clone();
    let mut tree = HoeffdingTree::new(schema, config)?;

    let mut instances = 0u64;
    let mut correct = 0u64;
    let mut window_correct = 0u64;
    let mut window_len = 0usize;
    let mut window_accuracies = Vec::new();
    let mut elapsed = Duration::ZERO;

    while let Some(item) = stream.next_instance() {
        let instance = item.map_err(|source| EvalError::Stream {
            instances_processed: instances,
            source,
        })?;
        let start = clock.now();
        let probs = tree.predict(&instance.values);
        let train_result = tree.train(&instance);
        elapsed += clock.now() - start;
        train_result.map_err(|source| EvalError::Train {
            instances_processed: instances,
            source,
        })?;

        instances += 1;
        if argmax(&probs) == instance.label {
            correct += 1;
            window_correct += 1;
        }
        window_len += 1;
        if window_len == window_size {
            window_accuracies.push(window_correct as f64 / window_size as f64);
            window_correct = 0;
            window_len = 0;
        }
    }
    if instances == 0 {
        return Err(EvalError::EmptyStream);
    }
    if window_len > 0 {
        window_accuracies.push(window_correct as f64 / window_len as f64);
    }

    Ok(PrequentialOutcome {
        instances,
        correct,
        accuracy: correct as f64 / instances as f64,
        elapsed_seconds: elapsed.as_secs_f64(),
        window_size,
        window_accuracies,
        model: tree.model_stats(),
        tree,
    })
}

/// One completed run in serializable form. `fingerprint` identifies the
/// full configuration; `base_fingerprint` identifies it with boosting
/// stripped, so a boosted run and its plain counterpart share it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub fingerprint: String,
    pub base_fingerprint: String,
    pub stream: String,
    pub algorithm: String,
    pub policy: String,
    pub olboost: bool,
    pub predictor: String,
    pub grace_period: u64,
    pub tie_threshold: f64,
    pub delta: f64,
    pub min_lambda: Option<f64>,
    pub max_lambda: Option<f64>,
    pub seed: u64,
    pub window: usize,
    pub instances: u64,
    pub correct: u64,
    pub accuracy: f64,
    pub elapsed_seconds: f64,
    pub node_count: u64,
    pub leaf_count: u64,
    pub depth: usize,
    pub size_bytes: u64,
    pub window_accuracies: Vec<f64>,
}

impl RunReport {
    /// The tuple that pairs runs across algorithms for significance
    /// testing: same stream, same shared hyperparameters.
    pub fn pairing_key(&self) -> String {
        format!(
            "{}|gp={}|tau={}|delta={}|predictor={}|seed={}|window={}",
            self.stream,
            self.grace_period,
            self.tie_threshold,
            self.delta,
            self.predictor,
            self.seed,
            self.window
        )
    }
}

/// Accuracy of the boosted run divided by the accuracy of its plain
/// counterpart; above 1.0 means boosting helped.
pub fn relative_accuracy(boosted: &RunReport, plain: &RunReport) -> Result<f64, EvalError> {
    if !boosted.olboost || plain.olboost {
        return Err(EvalError::MismatchedReports(format!(
            "expected a boosted run and a plain run, got olboost = {} and {}",
            boosted.olboost, plain.olboost
        )));
    }
    if boosted.base_fingerprint != plain.fingerprint {
        return Err(EvalError::MismatchedReports(format!(
            "base fingerprint {} does not match counterpart fingerprint {}",
            boosted.base_fingerprint, plain.fingerprint
        )));
    }
    if plain.accuracy == 0.0 {
        return Err(EvalError::UndefinedRatio);
    }
    Ok(boosted.accuracy / plain.accuracy)
}

/// What a comparison optimizes and which direction is better.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Accuracy,
    SizeBytes,
    Elapsed,
}

impl Metric {
    pub fn parse(s: &str) -> Option<Metric> {
        match s {
            "accuracy" => Some(Metric::Accuracy),
            "size" => Some(Metric::SizeBytes),
            "time" => Some(Metric::Elapsed),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::SizeBytes => "size",
            Metric::Elapsed => "time",
        }
    }

    fn value(&self, report: &RunReport) -> f64 {
        match self {
            Metric::Accuracy => report.accuracy,
            Metric::SizeBytes => report.size_bytes as f64,
            Metric::Elapsed => report.elapsed_seconds,
        }
    }

    fn higher_is_better(&self) -> bool {
        matches!(self, Metric::Accuracy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ABetter,
    BBetter,
    NoDifference,
}

/// One pairwise test on one stream: the paired per-config differences,
/// both p-values, and the verdict at the chosen significance level.
#[derive(Debug, Clone)]
pub struct ComparisonResult {
    pub stream: String,
    pub algo_a: String,
    pub algo_b: String,
    pub pairs: usize,
    pub two_sided_p: f64,
    pub one_sided_p: f64,
    pub verdict: Verdict,
}

/// Win counts shaped as a matrix: `wins[i][j]` is the number of streams on
/// which algorithm i was statistically better than algorithm j.
#[derive(Debug, Clone)]
pub struct ComparisonOutcome {
    pub metric: Metric,
    pub alpha: f64,
    pub algorithms: Vec<String>,
    pub wins: Vec<Vec<u64>>,
    pub results: Vec<ComparisonResult>,
}

/// Pairs every algorithm against every other on each stream, using the
/// shared hyperparameter grid as the paired sample. A two-sided test at
/// `alpha` decides whether a difference exists; the one-sided direction
/// then awards the win. Identical paired values (all differences zero)
/// count as no difference.
pub fn compare_algorithms(
    reports: &[RunReport],
    metric: Metric,
    alpha: f64,
) -> Result<ComparisonOutcome, EvalError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(EvalError::Config(format!(
            "alpha must be in (0, 1), got {alpha}"
        )));
    }
    let mut algorithms: Vec<String> = reports.iter().map(|r| r.algorithm.clone()).collect();
    algorithms.sort();
    algorithms.dedup();
    if algorithms.len() < 2 {
        return Err(EvalError::Config(
            "comparison needs at least two algorithms".into(),
        ));
    }
    let mut streams: Vec<String> = reports.iter().map(|r| r.stream.clone()).collect();
    streams.sort();
    streams.dedup();

    // (stream, algorithm) -> pairing key -> report
    let mut cells: BTreeMap<(String, String), BTreeMap<String, &RunReport>> = BTreeMap::new();
    for report in reports {
        cells
            .entry((report.stream.clone(), report.algorithm.clone()))
            .or_default()
            .insert(report.pairing_key(), report);
    }

    let mut wins = vec![vec![0u64; algorithms.len()]; algorithms.len()];
    let mut results = Vec::new();
    for stream in &streams {
        for (i, algo_a) in algorithms.iter().enumerate() {
            for (j, algo_b) in algorithms.iter().enumerate() {
                if j <= i {
                    continue;
                }
                let a_runs = cells
                    .get(&(stream.clone(), algo_a.clone()))
                    .ok_or_else(|| {
                        EvalError::Unpaired(format!("{algo_a} has no runs on {stream}"))
                    })?;
                let b_runs = cells
                    .get(&(stream.clone(), algo_b.clone()))
                    .ok_or_else(|| {
                        EvalError::Unpaired(format!("{algo_b} has no runs on {stream}"))
                    })?;
                let missing: Vec<&String> = a_runs
                    .keys()
                    .filter(|k| !b_runs.contains_key(*k))
                    .chain(b_runs.keys().filter(|k| !a_runs.contains_key(*k)))
                    .collect();
                if !missing.is_empty() {
                    return Err(EvalError::Unpaired(format!(
                        "{algo_a} vs {algo_b} on {stream}: no counterpart for {missing:?}"
                    )));
                }

                let mut differences = Vec::with_capacity(a_runs.len());
                for (key, a_report) in a_runs {
                    let b_report = b_runs[key];
                    let d = metric.value(a_report) - metric.value(b_report);
                    differences.push(if metric.higher_is_better() { d } else { -d });
                }

                let (two_sided_p, one_sided_p, verdict) =
                    match wilcoxon_signed_rank(&differences, Alternative::TwoSided) {
                        Err(WilcoxonError::AllZero) => (1.0, 1.0, Verdict::NoDifference),
                        Err(e) => return Err(e.into()),
                        Ok(two) if two >= alpha => {
                            let one = wilcoxon_signed_rank(&differences, Alternative::Greater)?;
                            (two, one, Verdict::NoDifference)
                        }
                        Ok(two) => {
                            let greater = wilcoxon_signed_rank(&differences, Alternative::Greater)?;
                            let less = wilcoxon_signed_rank(&differences, Alternative::Less)?;
                            if greater < less {
                                wins[i][j] += 1;
                                (two, greater, Verdict::ABetter)
                            } else {
                                wins[j][i] += 1;
                                (two, less, Verdict::BBetter)
                            }
                        }
                    };
                results.push(ComparisonResult {
                    stream: stream.clone(),
                    algo_a: algo_a.clone(),
                    algo_b: algo_b.clone(),
                    pairs: differences.len(),
                    two_sided_p,
                    one_sided_p,
                    verdict,
                });
            }
        }
    }
    Ok(ComparisonOutcome {
        metric,
        alpha,
        algorithms,
        wins,
        results,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::predict::PredictorKind;
    use crate::rng::Rng;
    use crate::stream::{Feature, Instance, Schema, Value};

    struct VecStream {
        schema: Arc<Schema>,
        items: std::vec::IntoIter<Instance>,
    }

    impl VecStream {
        fn new(schema: Arc<Schema>, items: Vec<Instance>) -> VecStream {
            VecStream {
                schema,
                items: items.into_iter(),
            }
        }
    }

    impl InstanceStream for VecStream {
        fn schema(&self) -> &Arc<Schema> {
            &self.schema
        }

        fn next_instance(&mut self) -> Option<Result<Instance, StreamError>> {
            self.items.next().map(Ok)
        }
    }

    fn schema() -> Arc<Schema> {
        Arc::new(
            Schema::new(
                vec![Feature::numeric("x")],
                vec!["a".to_string(), "b".to_string()],
            )
            .unwrap(),
        )
    }

    fn mc_config() -> TreeConfig {
        TreeConfig {
            predictor: PredictorKind::MostCommon,
            ..TreeConfig::default()
        }
    }

    fn inst(x: f64, label: usize) -> Instance {
        Instance {
            values: vec![Value::Numeric(x)],
            label,
        }
    }

    fn report(algorithm: &str, stream: &str, seed: u64, accuracy: f64) -> RunReport {
        RunReport {
            fingerprint: format!("f-{algorithm}-{stream}-{seed}"),
            base_fingerprint: format!("b-{stream}-{seed}"),
            stream: stream.to_string(),
            algorithm: algorithm.to_string(),
            policy: "vfdt".to_string(),
            olboost: false,
            predictor: "anb".to_string(),
            grace_period: 200,
            tie_threshold: 0.05,
            delta: 1e-7,
            min_lambda: None,
            max_lambda: None,
            seed,
            window: 1000,
            instances: 1000,
            correct: (accuracy * 1000.0).round() as u64,
            accuracy,
            elapsed_seconds: 1.0,
            node_count: 3,
            leaf_count: 2,
            depth: 1,
            size_bytes: 500,
            window_accuracies: vec![accuracy],
        }
    }

    #[test]
    fn hand_traced_test_then_train_scores_three_of_four() {
        // Labels [a, a, b, a] against a majority leaf: the first prediction
        // is a uniform tie broken to a, then a, a, a. Only the third is
        // wrong.
        let items = vec![inst(1.0, 0), inst(2.0, 0), inst(3.0, 1), inst(4.0, 0)];
        let mut stream = VecStream::new(schema(), items);
        let mut clock = MonotonicClock::new();
        let outcome = prequential_run(&mut stream, mc_config(), 1000, &mut clock).unwrap();
        assert_eq!(outcome.instances, 4);
        assert_eq!(outcome.correct, 3);
        assert_eq!(outcome.accuracy, 0.75);
        assert_eq!(outcome.window_accuracies, vec![0.75]);
    }

    #[test]
    fn constant_stream_misses_at_most_the_first_instance() {
        let items: Vec<Instance> = (0..1000).map(|i| inst(i as f64, 0)).collect();
        let mut stream = VecStream::new(schema(), items);
        let mut clock = MonotonicClock::new();
        let outcome = prequential_run(&mut stream, mc_config(), 100, &mut clock).unwrap();
        assert!(outcome.correct >= 999);
    }

    #[test]
    fn windows_reconstruct_the_final_accuracy() {
        let mut rng = Rng::new(5);
        let items: Vec<Instance> = (0..2500)
            .map(|_| {
                let x = rng.next_range(-1.0, 1.0);
                inst(x, usize::from(x > 0.0))
            })
            .collect();
        let mut stream = VecStream::new(schema(), items);
        let mut clock = MonotonicClock::new();
        let outcome = prequential_run(&mut stream, mc_config(), 1000, &mut clock).unwrap();
        assert_eq!(outcome.window_accuracies.len(), 3);
        let reconstructed: f64 = outcome.window_accuracies[0] * 1000.0
            + outcome.window_accuracies[1] * 1000.0
            + outcome.window_accuracies[2] * 500.0;
        assert!((reconstructed - outcome.correct as f64).abs() < 1e-9);
        assert!(
            (outcome.accuracy - outcome.correct as f64 / outcome.instances as f64).abs() < 1e-12
        );
    }

    #[test]
    fn timer_covers_exactly_two_readings_per_instance() {
        let items: Vec<Instance> = (0..50).map(|i| inst(i as f64, i % 2)).collect();
        let mut stream = VecStream::new(schema(), items);
        let tick = Duration::from_millis(1);
        let mut clock = FakeClock::new(tick);
        let outcome = prequential_run(&mut stream, mc_config(), 10, &mut clock).unwrap();
        // Two readings bracket predict+train; the gap is one tick each.
        assert!((outcome.elapsed_seconds - 0.050).abs() < 1e-12);
        assert_eq!(clock.readings(), 100);
        assert!(outcome.elapsed_seconds > 0.0);
    }

    #[test]
    fn empty_streams_are_an_error() {
        let mut stream = VecStream::new(schema(), Vec::new());
        let mut clock = MonotonicClock::new();
        assert!(matches!(
            prequential_run(&mut stream, mc_config(), 10, &mut clock),
            Err(EvalError::EmptyStream)
        ));
    }

    #[test]
    fn identical_runs_agree_except_for_elapsed_time() {
        let run = || {
            let mut rng = Rng::new(42);
            let items: Vec<Instance> = (0..5000)
                .map(|_| {
                    let x = rng.next_range(-5.0, 5.0);
                    inst(x, usize::from(x > 1.0))
                })
                .collect();
            let mut stream = VecStream::new(schema(), items);
            let mut clock = MonotonicClock::new();
            prequential_run(&mut stream, mc_config(), 500, &mut clock).unwrap()
        };
        let first = run();
        let second = run();
        assert_eq!(first.correct, second.correct);
        assert_eq!(first.window_accuracies, second.window_accuracies);
        assert_eq!(first.model, second.model);
        assert_eq!(
            first.tree.structure_signature(),
            second.tree.structure_signature()
        );
    }

    #[test]
    fn relative_accuracy_checks_counterparts() {
        let mut boosted = report("vfdt+olboost", "s", 1, 0.82);
        boosted.olboost = true;
        boosted.base_fingerprint = "base".to_string();
        let mut plain = report("vfdt", "s", 1, 0.80);
        plain.fingerprint = "base".to_string();
        let ratio = relative_accuracy(&boosted, &plain).unwrap();
        assert!((ratio - 1.025).abs() < 1e-12);

        let equal = relative_accuracy(
            &{
                let mut b = boosted.clone();
                b.accuracy = 0.80;
                b
            },
            &plain,
        )
        .unwrap();
        assert_eq!(equal, 1.0);

        let mut mismatched = plain.clone();
        mismatched.fingerprint = "other".to_string();
        assert!(matches!(
            relative_accuracy(&boosted, &mismatched),
            Err(EvalError::MismatchedReports(_))
        ));
        assert!(matches!(
            relative_accuracy(&plain, &boosted),
            Err(EvalError::MismatchedReports(_))
        ));

        let mut zero = plain.clone();
        zero.accuracy = 0.0;
        assert!(matches!(
            relative_accuracy(&boosted, &zero),
            Err(EvalError::UndefinedRatio)
        ));
    }

    fn grid(algorithm: &str, stream: &str, accuracies: &[f64]) -> Vec<RunReport> {
        accuracies
            .iter()
            .enumerate()
            .map(|(seed, &acc)| report(algorithm, stream, seed as u64, acc))
            .collect()
    }

    #[test]
    fn uniform_dominance_sweeps_the_matrix() {
        let mut reports = Vec::new();
        for stream in ["s1", "s2", "s3"] {
            reports.extend(grid("alpha", stream, &[0.9; 8]));
            reports.extend(grid("beta", stream, &[0.8; 8]));
        }
        let outcome = compare_algorithms(&reports, Metric::Accuracy, 0.05).unwrap();
        assert_eq!(outcome.algorithms, vec!["alpha", "beta"]);
        assert_eq!(outcome.wins[0][1], 3);
        assert_eq!(outcome.wins[1][0], 0);
        for result in &outcome.results {
            assert_eq!(result.verdict, Verdict::ABetter);
            assert_eq!(result.pairs, 8);
        }
    }

    #[test]
    fn identical_algorithms_never_win() {
        let mut reports = grid("alpha", "s1", &[0.9; 6]);
        reports.extend(grid("beta", "s1", &[0.9; 6]));
        let outcome = compare_algorithms(&reports, Metric::Accuracy, 0.05).unwrap();
        assert_eq!(outcome.wins, vec![vec![0, 0], vec![0, 0]]);
        assert_eq!(outcome.results[0].verdict, Verdict::NoDifference);
    }

    #[test]
    fn lower_is_better_for_size_and_time() {
        let mut reports = Vec::new();
        for (algorithm, size) in [("small", 100u64), ("large", 900u64)] {
            for seed in 0..8 {
                let mut r = report(algorithm, "s1", seed, 0.5);
                r.size_bytes = size + seed;
                reports.push(r);
            }
        }
        let outcome = compare_algorithms(&reports, Metric::SizeBytes, 0.05).unwrap();
        let small = outcome
            .algorithms
            .iter()
            .position(|a| a == "small")
            .unwrap();
        let large = outcome
            .algorithms
            .iter()
            .position(|a| a == "large")
            .unwrap();
        assert_eq!(outcome.wins[small][large], 1);
        assert_eq!(outcome.wins[large][small], 0);
    }

    #[test]
    fn wins_are_antisymmetric() {
        let mut rng = Rng::new(31);
        let mut reports = Vec::new();
        for stream in ["s1", "s2", "s3", "s4"] {
            for algorithm in ["a", "b", "c"] {
                for seed in 0..10 {
                    reports.push(report(algorithm, stream, seed, 0.5 + rng.next_f64() * 0.4));
                }
            }
        }
        let outcome = compare_algorithms(&reports, Metric::Accuracy, 0.05).unwrap();
        for i in 0..outcome.algorithms.len() {
            assert_eq!(outcome.wins[i][i], 0);
        }
        let per_stream: BTreeMap<(String, String), &ComparisonResult> = outcome
            .results
            .iter()
            .map(|r| ((r.algo_a.clone(), r.algo_b.clone()), r))
            .collect();
        assert_eq!(per_stream.len(), 3); // keyed by pair; one stream kept per key
        let total_wins: u64 = outcome.wins.iter().flatten().sum();
        let decided = outcome
            .results
            .iter()
            .filter(|r| r.verdict != Verdict::NoDifference)
            .count() as u64;
        assert_eq!(total_wins, decided);
    }

    #[test]
    fn unpaired_grids_name_the_missing_cell() {
        let mut reports = grid("alpha", "s1", &[0.9; 5]);
        reports.extend(grid("beta", "s1", &[0.8; 4]));
        let err = compare_algorithms(&reports, Metric::Accuracy, 0.05).unwrap_err();
        match err {
            EvalError::Unpaired(msg) => assert!(msg.contains("seed=4"), "{msg}"),
            other => panic!("expected Unpaired, got {other:?}"),
        }
    }
}
