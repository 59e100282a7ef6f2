//! Leaf-level classification: Most-Common class, Naive Bayes, and Adaptive
//! Naive Bayes, plus probability-vector normalization shared by every
//! predictor.

use crate::stats::{AttributeObserver, ClassDistribution};
use crate::stream::Value;

/// Smallest per-feature likelihood factor; keeps extreme tails from
/// collapsing a class score to zero.
const LIKELIHOOD_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictorKind {
    MostCommon,
    NaiveBayes,
    AdaptiveNaiveBayes,
}

impl PredictorKind {
    pub fn parse(s: &str) -> Option<PredictorKind> {
        match s {
            "mc" => Some(PredictorKind::MostCommon),
            "nb" => Some(PredictorKind::NaiveBayes),
            "anb" => Some(PredictorKind::AdaptiveNaiveBayes),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PredictorKind::MostCommon => "mc",
            PredictorKind::NaiveBayes => "nb",
            PredictorKind::AdaptiveNaiveBayes => "anb",
        }
    }
}

/// Divides non-negative scores by their sum; an all-zero input becomes the
/// uniform vector. Scores must be non-negative and the vector non-empty.
pub fn normalize(mut scores: Vec<f64>) -> Vec<f64> {
    assert!(!scores.is_empty(), "cannot normalize an empty score vector");
    let mut sum = 0.0;
    for &s in &scores {
        assert!(s >= 0.0, "scores must be non-negative, got {s}");
        sum += s;
    }
    if sum <= 0.0 {
        let uniform = 1.0 / scores.len() as f64;
        scores.fill(uniform);
    } else {
        for s in &mut scores {
            *s /= sum;
        }
    }
    scores
}

/// Index of the largest entry; ties break to the lowest index.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Class proportions of the observed distribution; uniform when empty.
pub fn mc_predict(dist: &ClassDistribution) -> Vec<f64> {
    normalize(dist.counts().to_vec())
}

/// Naive Bayes posterior: Laplace-smoothed prior times per-feature
/// likelihoods (smoothed frequencies for nominal features, Gaussian
/// densities for numeric ones), normalized by sum.
pub fn nb_predict(
    dist: &ClassDistribution,
    observers: &[AttributeObserver],
    values: &[Value],
) -> Vec<f64> {
    let n_classes = dist.n_classes();
    let prior_total = dist.total() + n_classes as f64;
    let mut scores = Vec::with_capacity(n_classes);
    for class in 0..n_classes {
        let mut score = (dist.count(class) + 1.0) / prior_total;
        for (observer, value) in observers.iter().zip(values) {
            score *= likelihood(observer, value, class);
        }
        scores.push(score);
    }
    normalize(scores)
}

fn likelihood(observer: &AttributeObserver, value: &Value, class: usize) -> f64 {
    match (observer, value) {
        (AttributeObserver::Nominal { counts }, Value::Nominal(v)) => {
            let row = &counts[class];
            let class_total: f64 = row.iter().sum();
            (row[*v] + 1.0) / (class_total + row.len() as f64)
        }
        (AttributeObserver::Numeric { per_class, .. }, Value::Numeric(x)) => {
            per_class[class].pdf(*x).max(LIKELIHOOD_FLOOR)
        }
        _ => panic!("value kind does not match observer kind"),
    }
}

/// Lifetime tallies of how often each base predictor's top class was right
/// at this leaf; drives the MC/NB arbitration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdaptiveState {
    mc_correct: u64,
    nb_correct: u64,
}

impl AdaptiveState {
    pub fn new() -> AdaptiveState {
        AdaptiveState::default()
    }

    pub fn mc_correct(&self) -> u64 {
        self.mc_correct
    }

    pub fn nb_correct(&self) -> u64 {
        self.nb_correct
    }

    pub fn nb_preferred(&self) -> bool {
        self.nb_correct >= self.mc_correct
    }

    /// Applies one instance's outcome to the tallies.
    pub fn record_outcomes(&mut self, mc_hit: bool, nb_hit: bool) {
        self.mc_correct += u64::from(mc_hit);
        self.nb_correct += u64::from(nb_hit);
    }
}

/// NB's output while NB's tally is at least MC's (ties favor NB, which
/// dominates asymptotically), MC's otherwise.
pub fn anb_predict(
    state: &AdaptiveState,
    dist: &ClassDistribution,
    observers: &[AttributeObserver],
    values: &[Value],
) -> Vec<f64> {
    if state.nb_preferred() {
        nb_predict(dist, observers, values)
    } else {
        mc_predict(dist)
    }
}

/// Scores both base predictors against the true label. Must run before the
/// leaf's statistics absorb the instance, so each predictor is judged on
/// data it has not seen.
pub fn anb_record(
    state: &mut AdaptiveState,
    dist: &ClassDistribution,
    observers: &[AttributeObserver],
    values: &[Value],
    label: usize,
) {
    state.record_outcomes(
        argmax(dist.counts()) == label,
        argmax(&nb_predict(dist, observers, values)) == label,
    );
}

/// One predictor dispatch used by tree leaves and the boosted leaf cores.
pub fn predict_with(
    kind: PredictorKind,
    state: &AdaptiveState,
    dist: &ClassDistribution,
    observers: &[AttributeObserver],
    values: &[Value],
) -> Vec<f64> {
    match kind {
        PredictorKind::MostCommon => mc_predict(dist),
        PredictorKind::NaiveBayes => nb_predict(dist, observers, values),
        PredictorKind::AdaptiveNaiveBayes => anb_predict(state, dist, observers, values),
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use crate::stream::FeatureKind;

    use super::*;

    fn dist(counts: &[f64]) -> ClassDistribution {
        let mut d = ClassDistribution::new(counts.len());
        for (c, &w) in counts.iter().enumerate() {
            if w > 0.0 {
                d.add(c, w);
            }
        }
        d
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(vec![2.0, 3.0]), vec![0.4, 0.6]);
        assert_eq!(normalize(vec![0.25, 0.75]), vec![0.25, 0.75]);
        let thirds = normalize(vec![0.0, 0.0, 0.0]);
        for p in thirds {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    #[should_panic(expected = "non-negative")]
    fn normalize_rejects_negative_scores() {
        normalize(vec![1.0, -0.5]);
    }

    #[test]
    fn mc_predict_examples() {
        assert_eq!(mc_predict(&dist(&[10.0, 0.0])), vec![1.0, 0.0]);
        assert_eq!(mc_predict(&dist(&[0.0, 0.0])), vec![0.5, 0.5]);
        assert_eq!(mc_predict(&dist(&[3.0, 1.0])), vec![0.75, 0.25]);
    }

    #[test]
    fn argmax_ties_break_low() {
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.1, 0.9, 0.9]), 1);
    }

    fn binary_feature_observer(class0: [f64; 2], class1: [f64; 2]) -> AttributeObserver {
        AttributeObserver::Nominal {
            counts: vec![class0.to_vec(), class1.to_vec()],
        }
    }

    #[test]
    fn nb_prefers_class_matching_the_evidence() {
        // 8 instances: class 0 always shows value 0, class 1 always value 1.
        let obs = binary_feature_observer([4.0, 0.0], [0.0, 4.0]);
        let d = dist(&[4.0, 4.0]);
        let probs = nb_predict(&d, &[obs], &[Value::Nominal(0)]);
        assert_eq!(argmax(&probs), 0);
        // Hand-computed: prior 0.5 each; likelihoods (4+1)/(4+2) vs (0+1)/(4+2).
        let expected0 = (5.0 / 6.0) / (5.0 / 6.0 + 1.0 / 6.0);
        assert!((probs[0] - expected0).abs() < 1e-12);
    }

    #[test]
    fn uninformative_features_reduce_nb_to_smoothed_priors() {
        // Identical per-class rows make every likelihood equal.
        let obs = binary_feature_observer([2.0, 2.0], [2.0, 2.0]);
        let d = dist(&[3.0, 1.0]);
        let probs = nb_predict(&d, &[obs], &[Value::Nominal(1)]);
        let smoothed = normalize(vec![3.0 + 1.0, 1.0 + 1.0]);
        for (p, e) in probs.iter().zip(&smoothed) {
            assert!((p - e).abs() < 1e-9);
        }
    }

    #[test]
    fn nb_separated_gaussians_give_confident_posterior() {
        let mut obs = AttributeObserver::for_feature(&FeatureKind::Numeric, 2);
        // Class 0 around 0, class 1 around 10, both with unit variance
        // (two points at mean ± 1 give sample variance 1).
        for (x, c) in [(-1.0, 0), (1.0, 0), (9.0, 1), (11.0, 1)] {
            obs.observe(&Value::Numeric(x), c, 1.0).unwrap();
        }
        let d = dist(&[2.0, 2.0]);
        let probs = nb_predict(&d, &[obs], &[Value::Numeric(0.0)]);
        assert!(probs[0] > 0.99, "got {probs:?}");
    }

    #[test]
    fn anb_predict_follows_the_better_tally() {
        let obs = binary_feature_observer([4.0, 0.0], [0.0, 4.0]);
        // MC favors class 0; NB at value 1 favors class 1.
        let d = dist(&[5.0, 3.0]);
        let values = [Value::Nominal(1)];

        let nb_ahead = AdaptiveState {
            mc_correct: 5,
            nb_correct: 9,
        };
        assert_eq!(
            anb_predict(&nb_ahead, &d, std::slice::from_ref(&obs), &values),
            nb_predict(&d, std::slice::from_ref(&obs), &values)
        );

        let mc_ahead = AdaptiveState {
            mc_correct: 9,
            nb_correct: 5,
        };
        assert_eq!(
            anb_predict(&mc_ahead, &d, std::slice::from_ref(&obs), &values),
            mc_predict(&d)
        );

        let fresh = AdaptiveState::new();
        assert_eq!(
            anb_predict(&fresh, &d, std::slice::from_ref(&obs), &values),
            nb_predict(&d, &[obs], &values)
        );
    }

    #[test]
    fn anb_record_tracks_each_predictor_independently() {
        let obs = binary_feature_observer([4.0, 0.0], [0.0, 4.0]);
        let d = dist(&[5.0, 3.0]);
        let mut state = AdaptiveState::new();

        // MC says 0, NB at value 0 says 0: label 0 rewards both.
        anb_record(
            &mut state,
            &d,
            std::slice::from_ref(&obs),
            &[Value::Nominal(0)],
            0,
        );
        assert_eq!((state.mc_correct, state.nb_correct), (1, 1));

        // MC says 0, NB at value 1 says 1: label 1 rewards NB only.
        anb_record(
            &mut state,
            &d,
            std::slice::from_ref(&obs),
            &[Value::Nominal(1)],
            1,
        );
        assert_eq!((state.mc_correct, state.nb_correct), (1, 2));

        // Label 1 at value 0: both predict 0, neither is rewarded.
        anb_record(&mut state, &d, &[obs], &[Value::Nominal(0)], 1);
        assert_eq!((state.mc_correct, state.nb_correct), (1, 2));
    }

    #[test]
    fn nb_overtaking_mc_flips_the_prediction_source() {
        let obs = binary_feature_observer([4.0, 0.0], [0.0, 4.0]);
        let d = dist(&[5.0, 3.0]);
        let values = [Value::Nominal(1)];
        let mut state = AdaptiveState {
            mc_correct: 2,
            nb_correct: 1,
        };
        assert_eq!(
            anb_predict(&state, &d, std::slice::from_ref(&obs), &values),
            mc_predict(&d)
        );
        // Two instances at value 1 with label 1: NB right both times, MC wrong.
        for _ in 0..2 {
            anb_record(&mut state, &d, std::slice::from_ref(&obs), &values, 1);
        }
        assert_eq!((state.mc_correct, state.nb_correct), (2, 3));
        assert_eq!(
            anb_predict(&state, &d, std::slice::from_ref(&obs), &values),
            nb_predict(&d, &[obs], &values)
        );
    }

    proptest! {
        #[test]
        fn normalize_output_is_a_probability_vector(
            scores in proptest::collection::vec(0.0f64..1e6, 1..8),
        ) {
            let probs = normalize(scores);
            let sum: f64 = probs.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
            for p in probs {
                prop_assert!((0.0..=1.0 + 1e-12).contains(&p));
            }
        }

        #[test]
        fn normalize_is_scale_invariant(
            scores in proptest::collection::vec(1e-6f64..1e3, 2..6),
            scale in 1e-3f64..1e3,
        ) {
            let base = normalize(scores.clone());
            let scaled = normalize(scores.iter().map(|s| s * scale).collect());
            for (a, b) in base.iter().zip(&scaled) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn nb_outputs_are_probability_vectors(
            rows in proptest::collection::vec(
                proptest::collection::vec(0.0f64..20.0, 3),
                2..4,
            ),
            query in 0usize..3,
        ) {
            let n_classes = rows.len();
            let mut d = ClassDistribution::new(n_classes);
            for (c, row) in rows.iter().enumerate() {
                let w: f64 = row.iter().sum();
                if w > 0.0 {
                    d.add(c, w);
                }
            }
            let obs = AttributeObserver::Nominal { counts: rows };
            let probs = nb_predict(&d, &[obs], &[Value::Nominal(query)]);
            let sum: f64 = probs.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
        }

        #[test]
        fn anb_source_always_matches_the_tally_rule(mc in 0u64..20, nb in 0u64..20) {
            let state = AdaptiveState { mc_correct: mc, nb_correct: nb };
            let obs = binary_feature_observer([4.0, 0.0], [0.0, 4.0]);
            let d = dist(&[5.0, 3.0]);
            let values = [Value::Nominal(1)];
            let got = anb_predict(&state, &d, std::slice::from_ref(&obs), &values);
            let expected = if nb >= mc {
                nb_predict(&d, &[obs], &values)
            } else {
                mc_predict(&d)
            };
            prop_assert_eq!(got, expected);
        }
    }
}
