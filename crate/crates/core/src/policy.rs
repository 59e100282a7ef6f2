//! Growth-gating policies layered on the base split test. The permissive
//! baseline approves every split the Hoeffding test allows; the two
//! stricter policies compare the splitting leaf against running statistics
//! of every previous split opportunity and veto splits that look below par,
//! trading a little accuracy headroom for much smaller trees.

use std::fmt;

/// Running mean and population standard deviation over a series,
/// accumulated as count, sum, and sum of squares.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunningStats {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

impl RunningStats {
    pub fn new() -> RunningStats {
        RunningStats::default()
    }

    pub fn from_values(values: &[f64]) -> RunningStats {
        let mut s = RunningStats::new();
        for &v in values {
            s.push(v);
        }
        s
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        assert!(self.n > 0, "mean of an empty series");
        self.sum / self.n as f64
    }

    /// Standard deviation with divisor N (the series is the whole
    /// population of recorded events, not a sample).
    pub fn population_std(&self) -> f64 {
        let mean = self.mean();
        (self.sum_sq / self.n as f64 - mean * mean).max(0.0).sqrt()
    }
}

/// True iff `x` clears the permissive band: x ≥ mean − std.
pub fn phi(x: f64, stats: &RunningStats) -> bool {
    x >= stats.mean() - stats.population_std()
}

/// True iff `x` clears the high band: x ≥ mean + std.
pub fn varpi(x: f64, stats: &RunningStats) -> bool {
    x >= stats.mean() + stats.population_std()
}

/// Statistics of every split opportunity so far: the leaf entropy H, best
/// gain G, and leaf weight n recorded at each event where the base split
/// conditions held, across the whole tree. The three series always hold
/// the same number of events.
#[derive(Debug, Clone, Default)]
pub struct SatisfiedSplitHistory {
    entropies: RunningStats,
    gains: RunningStats,
    counts: RunningStats,
}

impl SatisfiedSplitHistory {
    pub fn new() -> SatisfiedSplitHistory {
        SatisfiedSplitHistory::default()
    }

    pub fn record(&mut self, entropy: f64, gain: f64, n: f64) {
        self.entropies.push(entropy);
        self.gains.push(gain);
        self.counts.push(n);
    }

    pub fn events(&self) -> u64 {
        self.entropies.count()
    }

    pub fn entropies(&self) -> &RunningStats {
        &self.entropies
    }

    pub fn gains(&self) -> &RunningStats {
        &self.gains
    }

    pub fn counts(&self) -> &RunningStats {
        &self.counts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GrowthPolicy {
    /// Split whenever the base conditions hold.
    Vfdt,
    /// Veto splits whose leaf looks below par on all-leaf entropy, event
    /// entropy, event gain, or leaf weight.
    SvfdtI,
    /// Like [`GrowthPolicy::SvfdtI`], but a markedly high entropy or gain
    /// skips the other checks entirely.
    SvfdtII,
}

impl GrowthPolicy {
    pub fn parse(s: &str) -> Option<GrowthPolicy> {
        match s {
            "vfdt" => Some(GrowthPolicy::Vfdt),
            "svfdt1" => Some(GrowthPolicy::SvfdtI),
            "svfdt2" => Some(GrowthPolicy::SvfdtII),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GrowthPolicy::Vfdt => "vfdt",
            GrowthPolicy::SvfdtI => "svfdt1",
            GrowthPolicy::SvfdtII => "svfdt2",
        }
    }
}

impl fmt::Display for GrowthPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Decides whether an approved-by-the-base-test split may proceed. Call
/// only after the event has been recorded into `history`, so the event is
/// a member of its own statistics; the very first event therefore always
/// approves. `leaf_entropies` is the current entropy of every leaf in the
/// tree, the splitting leaf included.
pub fn gate(
    policy: GrowthPolicy,
    leaf_entropy: f64,
    best_gain: f64,
    leaf_weight: f64,
    history: &SatisfiedSplitHistory,
    leaf_entropies: &[f64],
) -> bool {
    assert!(
        history.events() > 0,
        "gate called before the event was recorded"
    );
    match policy {
        GrowthPolicy::Vfdt => true,
        GrowthPolicy::SvfdtI => svfdt_constraints(
            leaf_entropy,
            best_gain,
            leaf_weight,
            history,
            leaf_entropies,
        ),
        GrowthPolicy::SvfdtII => {
            if varpi(leaf_entropy, history.entropies()) || varpi(best_gain, history.gains()) {
                return true;
            }
            svfdt_constraints(
                leaf_entropy,
                best_gain,
                leaf_weight,
                history,
                leaf_entropies,
            )
        }
    }
}

fn svfdt_constraints(
    leaf_entropy: f64,
    best_gain: f64,
    leaf_weight: f64,
    history: &SatisfiedSplitHistory,
    leaf_entropies: &[f64],
) -> bool {
    let snapshot = RunningStats::from_values(leaf_entropies);
    phi(leaf_entropy, &snapshot)
        && phi(leaf_entropy, history.entropies())
        && phi(best_gain, history.gains())
        && leaf_weight >= history.counts().mean()
}
