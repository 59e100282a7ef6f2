//! Leaf-local online boosting. Each leaf carries a second, completely
//! separate set of statistics used only for prediction. On every training
//! instance the boosted predictor scores itself, converts its confidence in
//! the true class into a Poisson rate (low confidence, high rate), draws a
//! weight, and absorbs the instance that many times. Tree growth never sees
//! these statistics, so enabling boosting changes predictions but not
//! structure.

use crate::predict::{argmax, nb_predict, normalize, predict_with, AdaptiveState, PredictorKind};
use crate::rng::Rng;
use crate::stats::{AttributeObserver, ClassDistribution};
use crate::stream::{Schema, Value};

/// Poisson-rate bounds for the boosted updates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostConfig {
    pub min_lambda: f64,
    pub max_lambda: f64,
}

impl Default for BoostConfig {
    fn default() -> BoostConfig {
        BoostConfig {
            min_lambda: 1.0,
            max_lambda: 12.0,
        }
    }
}

impl BoostConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !self.min_lambda.is_finite() || !self.max_lambda.is_finite() {
            return Err("lambda bounds must be finite".into());
        }
        if self.min_lambda < 0.0 {
            return Err(format!("min_lambda must be >= 0, got {}", self.min_lambda));
        }
        if self.max_lambda < self.min_lambda {
            return Err(format!(
                "max_lambda {} is below min_lambda {}",
                self.max_lambda, self.min_lambda
            ));
        }
        Ok(())
    }
}

/// λ = (min_λ − max_λ)·p + max_λ: linear in the predicted probability of
/// the true class, from max_λ at p = 0 down to min_λ at p = 1.
pub fn compute_lambda(p_true: f64, min_lambda: f64, max_lambda: f64) -> f64 {
    assert!(
        min_lambda >= 0.0,
        "min_lambda must be >= 0, got {min_lambda}"
    );
    assert!(
        max_lambda >= min_lambda,
        "max_lambda {max_lambda} is below min_lambda {min_lambda}"
    );
    // Normalized predictor outputs can overshoot [0, 1] by float error.
    assert!(
        (-1e-9..=1.0 + 1e-9).contains(&p_true),
        "p_true must be a probability, got {p_true}"
    );
    let p = p_true.clamp(0.0, 1.0);
    (min_lambda - max_lambda) * p + max_lambda
}

/// One Poisson draw; the count of times a training instance is replayed.
pub fn sample_weight(lambda: f64, rng: &mut Rng) -> u64 {
    rng.next_poisson(lambda)
}

/// The boosted half of a leaf: its own class distribution, observers, and
/// adaptive tallies, plus a private deterministic rng stream.
#[derive(Debug, Clone)]
pub struct BoostState {
    core: PredictorKind,
    config: BoostConfig,
    dist: ClassDistribution,
    observers: Vec<AttributeObserver>,
    adaptive: AdaptiveState,
    rng: Rng,
}

impl BoostState {
    /// Fresh empty state for a leaf. The rng stream is derived from the
    /// tree seed and the leaf's birth index, so every leaf draws an
    /// independent, reproducible sequence.
    pub fn new(
        core: PredictorKind,
        config: BoostConfig,
        schema: &Schema,
        tree_seed: u64,
        leaf_birth_index: u64,
    ) -> BoostState {
        BoostState {
            core,
            config,
            dist: ClassDistribution::new(schema.n_classes()),
            observers: schema
                .features()
                .iter()
                .map(|f| AttributeObserver::for_feature(&f.kind, schema.n_classes()))
                .collect(),
            adaptive: AdaptiveState::new(),
            rng: Rng::new_stream(tree_seed, leaf_birth_index),
        }
    }

    /// State for a child created when this leaf splits: same core and rate
    /// bounds, its own rng stream, fresh observers, and the boosted class
    /// distribution seeded with the mass the child inherits from the split
    /// projection, mirroring how the child's growth statistics start. The
    /// parent's boosted observers are discarded with the parent.
    pub fn fresh_child(
        &self,
        schema: &Schema,
        tree_seed: u64,
        child_birth_index: u64,
        inherited: ClassDistribution,
    ) -> BoostState {
        let mut state =
            BoostState::new(self.core, self.config, schema, tree_seed, child_birth_index);
        state.dist = inherited;
        state
    }

    pub fn config(&self) -> &BoostConfig {
        &self.config
    }

    /// The boosted core's prediction, normalized by sum.
    pub fn predict(&self, values: &[Value]) -> Vec<f64> {
        predict_with(
            self.core,
            &self.adaptive,
            &self.dist,
            &self.observers,
            values,
        )
    }

    /// One boosted training step: score the instance with the current
    /// boosted statistics, turn the true-class probability into a Poisson
    /// rate, draw a weight w, and absorb the instance with weight w (one
    /// weighted update, equal to w unit updates). Adaptive tallies update
    /// once per instance regardless of w; everything happens before the
    /// statistics absorb the instance.
    pub fn train(&mut self, values: &[Value], label: usize) {
        let p_true = match self.core {
            PredictorKind::MostCommon => normalize(self.dist.counts().to_vec())[label],
            PredictorKind::NaiveBayes => nb_predict(&self.dist, &self.observers, values)[label],
            PredictorKind::AdaptiveNaiveBayes => {
                // One posterior evaluation serves both the prediction and
                // the adaptive tallies.
                let nb = nb_predict(&self.dist, &self.observers, values);
                let mc = normalize(self.dist.counts().to_vec());
                let p = if self.adaptive.nb_preferred() {
                    nb[label]
                } else {
                    mc[label]
                };
                self.adaptive
                    .record_outcomes(argmax(&mc) == label, argmax(&nb) == label);
                p
            }
        };
        let lambda = compute_lambda(p_true, self.config.min_lambda, self.config.max_lambda);
        let w = sample_weight(lambda, &mut self.rng);
        if w > 0 {
            let weight = w as f64;
            self.dist.add(label, weight);
            for (observer, value) in self.observers.iter_mut().zip(values) {
                observer
                    .observe(value, label, weight)
                    .expect("instance validated against the schema before boosting");
            }
        }
    }

    /// Statistics inspection used by size accounting and tests.
    pub fn dist(&self) -> &ClassDistribution {
        &self.dist
    }

    pub fn observers(&self) -> &[AttributeObserver] {
        &self.observers
    }

    pub fn adaptive(&self) -> &AdaptiveState {
        &self.adaptive
    }
}
