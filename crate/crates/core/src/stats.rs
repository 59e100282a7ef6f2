//! Incremental sufficient statistics and split-evaluation math: class
//! distributions, entropy, the Hoeffding bound, per-feature attribute
//! observers, and information-gain ranking of split candidates.

use statrs::function::erf;

use crate::stream::{FeatureKind, Value};

/// Per-class observed weights plus their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassDistribution {
    counts: Vec<f64>,
    total: f64,
}

impl ClassDistribution {
    pub fn new(n_classes: usize) -> ClassDistribution {
        ClassDistribution {
            counts: vec![0.0; n_classes],
            total: 0.0,
        }
    }

    pub fn add(&mut self, class: usize, weight: f64) {
        assert!(weight >= 0.0, "weight must be non-negative, got {weight}");
        self.counts[class] += weight;
        self.total += weight;
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn count(&self, class: usize) -> f64 {
        self.counts[class]
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    /// True when at most one class carries weight.
    pub fn is_pure(&self) -> bool {
        self.counts.iter().filter(|&&c| c > 0.0).count() <= 1
    }

    /// Shannon entropy in bits; 0 for an empty distribution.
    pub fn entropy(&self) -> f64 {
        if self.total <= 0.0 {
            return 0.0;
        }
        let mut h = 0.0;
        for &c in &self.counts {
            if c > 0.0 {
                let p = c / self.total;
                h -= p * p.log2();
            }
        }
        h.max(0.0)
    }
}

/// ε = sqrt(R²·ln(1/δ) / (2n)): with probability 1−δ, the true mean of n
/// observations of a range-R variable lies within ε of the empirical mean.
pub fn hoeffding_bound(range: f64, delta: f64, n: f64) -> f64 {
    assert!(range > 0.0, "range must be positive, got {range}");
    assert!(
        delta > 0.0 && delta <= 1.0,
        "delta must be in (0, 1], got {delta}"
    );
    assert!(n > 0.0, "n must be positive, got {n}");
    (range * range * (1.0 / delta).ln() / (2.0 * n)).sqrt()
}

/// Weighted running Gaussian fit (Welford update): stable mean and
/// unbiased variance over millions of weighted observations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GaussianEstimator {
    weight_sum: f64,
    mean: f64,
    m2: f64,
}

impl GaussianEstimator {
    pub fn new() -> GaussianEstimator {
        GaussianEstimator::default()
    }

    pub fn add(&mut self, value: f64, weight: f64) {
        assert!(weight > 0.0, "weight must be positive, got {weight}");
        self.weight_sum += weight;
        let delta = value - self.mean;
        self.mean += weight / self.weight_sum * delta;
        self.m2 += weight * delta * (value - self.mean);
    }

    pub fn weight_sum(&self) -> f64 {
        self.weight_sum
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased (sample) variance; 0 until more than one unit of weight.
    pub fn variance(&self) -> f64 {
        if self.weight_sum > 1.0 {
            (self.m2 / (self.weight_sum - 1.0)).max(0.0)
        } else {
            0.0
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Normal density at `x`. Degenerate fits are point masses: full mass
    /// at the mean, none elsewhere. No observations at all give 0.
    pub fn pdf(&self, x: f64) -> f64 {
        if self.weight_sum <= 0.0 {
            return 0.0;
        }
        let var = self.variance();
        if var <= 0.0 {
            return if x == self.mean { 1.0 } else { 0.0 };
        }
        let d = x - self.mean;
        (-d * d / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
    }

    /// P(X ≤ x) under the fitted normal; a step at the mean when the fit
    /// is degenerate.
    pub fn cdf(&self, x: f64) -> f64 {
        if self.weight_sum <= 0.0 {
            return 0.0;
        }
        let var = self.variance();
        if var <= 0.0 {
            return if x >= self.mean { 1.0 } else { 0.0 };
        }
        0.5 * (1.0 + erf::erf((x - self.mean) / (2.0 * var).sqrt()))
    }
}

/// Per-feature, per-class sufficient statistics feeding both split-gain
/// evaluation and Naive Bayes likelihoods.
#[derive(Debug, Clone)]
pub enum AttributeObserver {
    Nominal {
        /// `counts[class][category]` of observed weight.
        counts: Vec<Vec<f64>>,
    },
    Numeric {
        per_class: Vec<GaussianEstimator>,
        min: f64,
        max: f64,
    },
}

/// Observation that cannot be folded into an observer.
#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ObserveError {
    #[error("nominal category index {index} out of range for arity {arity}")]
    CategoryOutOfRange { index: usize, arity: usize },
    #[error("value kind does not match the observer's feature kind")]
    KindMismatch,
}

impl AttributeObserver {
    pub fn for_feature(kind: &FeatureKind, n_classes: usize) -> AttributeObserver {
        match kind {
            FeatureKind::Nominal { categories } => AttributeObserver::Nominal {
                counts: vec![vec![0.0; categories.len()]; n_classes],
            },
            FeatureKind::Numeric => AttributeObserver::Numeric {
                per_class: vec![GaussianEstimator::new(); n_classes],
                min: f64::INFINITY,
                max: f64::NEG_INFINITY,
            },
        }
    }

    pub fn observe(
        &mut self,
        value: &Value,
        class: usize,
        weight: f64,
    ) -> Result<(), ObserveError> {
        match (self, value) {
            (AttributeObserver::Nominal { counts }, Value::Nominal(v)) => {
                let arity = counts[class].len();
                if *v >= arity {
                    return Err(ObserveError::CategoryOutOfRange { index: *v, arity });
                }
                counts[class][*v] += weight;
                Ok(())
            }
            (
                AttributeObserver::Numeric {
                    per_class,
                    min,
                    max,
                },
                Value::Numeric(x),
            ) => {
                per_class[class].add(*x, weight);
                if *x < *min {
                    *min = *x;
                }
                if *x > *max {
                    *max = *x;
                }
                Ok(())
            }
            _ => Err(ObserveError::KindMismatch),
        }
    }

    /// Total observed weight per class.
    pub fn class_weights(&self) -> Vec<f64> {
        match self {
            AttributeObserver::Nominal { counts } => {
                counts.iter().map(|row| row.iter().sum()).collect()
            }
            AttributeObserver::Numeric { per_class, .. } => {
                per_class.iter().map(|e| e.weight_sum()).collect()
            }
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.class_weights().iter().sum()
    }
}

/// The test a split node applies to route an instance.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitTest {
    /// One child per category of the feature.
    NominalMultiway { feature: usize, arity: usize },
    /// Child 0 for value ≤ threshold, child 1 otherwise.
    NumericThreshold { feature: usize, threshold: f64 },
}

impl SplitTest {
    pub fn feature(&self) -> usize {
        match *self {
            SplitTest::NominalMultiway { feature, .. }
            | SplitTest::NumericThreshold { feature, .. } => feature,
        }
    }

    pub fn n_children(&self) -> usize {
        match *self {
            SplitTest::NominalMultiway { arity, .. } => arity,
            SplitTest::NumericThreshold { .. } => 2,
        }
    }

    /// Child index the instance routes to.
    pub fn route(&self, values: &[Value]) -> usize {
        match *self {
            SplitTest::NominalMultiway { feature, .. } => match values[feature] {
                Value::Nominal(v) => v,
                Value::Numeric(_) => panic!("numeric value routed through a nominal split"),
            },
            SplitTest::NumericThreshold { feature, threshold } => match values[feature] {
                Value::Numeric(x) => usize::from(x > threshold),
                Value::Nominal(_) => panic!("nominal value routed through a numeric split"),
            },
        }
    }
}

/// A candidate split: the test, its information gain, and the class
/// distributions its children would start from.
#[derive(Debug, Clone)]
pub struct SplitCandidate {
    pub test: SplitTest,
    pub merit: f64,
    pub child_dists: Vec<ClassDistribution>,
}

/// Number of equal-width threshold candidates evaluated per numeric feature.
const NUMERIC_THRESHOLD_CANDIDATES: usize = 10;

/// Ranks one candidate per evaluable feature by information gain and
/// returns the top two (always from different features; merit ties break
/// toward the lower feature index). Numeric features contribute their best
/// threshold out of [`NUMERIC_THRESHOLD_CANDIDATES`] equal-width cut points
/// strictly between the observed min and max; nominal features contribute
/// one multiway candidate. Gain is measured against the class distribution
/// reconstructed from each candidate's own children, so it is never
/// negative.
pub fn best_two_splits(
    observers: &[AttributeObserver],
) -> (Option<SplitCandidate>, Option<SplitCandidate>) {
    let mut best: Option<SplitCandidate> = None;
    let mut second: Option<SplitCandidate> = None;
    for (feature, observer) in observers.iter().enumerate() {
        let Some(candidate) = best_candidate_for_feature(feature, observer) else {
            continue;
        };
        if best.as_ref().is_none_or(|b| candidate.merit > b.merit) {
            second = best.take();
            best = Some(candidate);
        } else if second.as_ref().is_none_or(|s| candidate.merit > s.merit) {
            second = Some(candidate);
        }
    }
    (best, second)
}

fn best_candidate_for_feature(
    feature: usize,
    observer: &AttributeObserver,
) -> Option<SplitCandidate> {
    match observer {
        AttributeObserver::Nominal { counts } => {
            let arity = counts.first()?.len();
            let mut child_dists: Vec<ClassDistribution> = (0..arity)
                .map(|_| ClassDistribution::new(counts.len()))
                .collect();
            let mut total = 0.0;
            for (class, row) in counts.iter().enumerate() {
                for (v, &w) in row.iter().enumerate() {
                    if w > 0.0 {
                        child_dists[v].add(class, w);
                        total += w;
                    }
                }
            }
            if total <= 0.0 {
                return None;
            }
            Some(SplitCandidate {
                test: SplitTest::NominalMultiway { feature, arity },
                merit: information_gain(&child_dists),
                child_dists,
            })
        }
        AttributeObserver::Numeric {
            per_class,
            min,
            max,
        } => {
            if min.partial_cmp(max) != Some(std::cmp::Ordering::Less) {
                return None;
            }
            let class_weights: Vec<f64> = per_class.iter().map(|e| e.weight_sum()).collect();
            if class_weights.iter().sum::<f64>() <= 0.0 {
                return None;
            }
            let mut best: Option<SplitCandidate> = None;
            let steps = NUMERIC_THRESHOLD_CANDIDATES;
            for j in 1..=steps {
                let threshold = min + (max - min) * j as f64 / (steps + 1) as f64;
                let mut left = ClassDistribution::new(per_class.len());
                let mut right = ClassDistribution::new(per_class.len());
                for (class, est) in per_class.iter().enumerate() {
                    let w = class_weights[class];
                    if w <= 0.0 {
                        continue;
                    }
                    let below = w * est.cdf(threshold);
                    left.add(class, below);
                    right.add(class, w - below);
                }
                let child_dists = vec![left, right];
                let merit = information_gain(&child_dists);
                if best.as_ref().is_none_or(|b| merit > b.merit) {
                    best = Some(SplitCandidate {
                        test: SplitTest::NumericThreshold { feature, threshold },
                        merit,
                        child_dists,
                    });
                }
            }
            best
        }
    }
}

/// Information gain of a partition relative to the merged distribution of
/// its children.
fn information_gain(child_dists: &[ClassDistribution]) -> f64 {
    let n_classes = child_dists[0].n_classes();
    let mut parent = ClassDistribution::new(n_classes);
    for child in child_dists {
        for class in 0..n_classes {
            let w = child.count(class);
            if w > 0.0 {
                parent.add(class, w);
            }
        }
    }
    let total = parent.total();
    if total <= 0.0 {
        return 0.0;
    }
    let mut children_entropy = 0.0;
    for child in child_dists {
        if child.total() > 0.0 {
            children_entropy += child.total() / total * child.entropy();
        }
    }
    (parent.entropy() - children_entropy).max(0.0)
}
