//! Wilcoxon signed-rank test for paired differences. Zero differences are
//! dropped before ranking (Wilcoxon's original treatment), absolute values
//! are ranked with average ranks on ties, and the p-value comes from the
//! exact null distribution of the positive-rank sum for n ≤ 25 or from a
//! normal approximation with tie and continuity corrections above that.

use statrs::distribution::{ContinuousCDF, Normal};

/// Largest sample size for which the exact null distribution is computed.
const EXACT_LIMIT: usize = 25;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum WilcoxonError {
    #[error("all differences are zero; the test is degenerate")]
    AllZero,
    #[error("differences must be finite, got {0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alternative {
    TwoSided,
    /// The differences tend to be positive.
    Greater,
    /// The differences tend to be negative.
    Less,
}

/// P-value for the hypothesis that the paired differences are symmetric
/// about zero, against the given alternative.
pub fn wilcoxon_signed_rank(
    differences: &[f64],
    alternative: Alternative,
) -> Result<f64, WilcoxonError> {
    for &d in differences {
        if !d.is_finite() {
            return Err(WilcoxonError::NonFinite(d));
        }
    }
    let nonzero: Vec<f64> = differences.iter().copied().filter(|&d| d != 0.0).collect();
    if nonzero.is_empty() {
        return Err(WilcoxonError::AllZero);
    }

    // Ranks kept doubled so average ranks on ties stay integral.
    let doubled = doubled_ranks(&nonzero);
    let w_plus: u64 = doubled
        .iter()
        .zip(&nonzero)
        .filter(|(_, &d)| d > 0.0)
        .map(|(&r, _)| r)
        .sum();

    let n = nonzero.len();
    let p = if n <= EXACT_LIMIT {
        exact_p(&doubled, w_plus, alternative)
    } else {
        approximate_p(&doubled, w_plus, alternative)
    };
    Ok(p.min(1.0))
}

/// Average ranks of |d|, multiplied by two. A tie group occupying sorted
/// positions i..=j (zero-based) has average rank (i + j + 2) / 2, so its
/// doubled rank is exactly i + j + 2.
fn doubled_ranks(nonzero: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..nonzero.len()).collect();
    order.sort_by(|&a, &b| {
        nonzero[a]
            .abs()
            .partial_cmp(&nonzero[b].abs())
            .expect("differences are finite")
    });
    let mut doubled = vec![0u64; nonzero.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && nonzero[order[j + 1]].abs() == nonzero[order[i]].abs() {
            j += 1;
        }
        for &idx in &order[i..=j] {
            doubled[idx] = (i + j + 2) as u64;
        }
        i = j + 1;
    }
    doubled
}

/// Counts sign assignments by dynamic programming over the doubled ranks:
/// `counts[s]` is the number of the 2^n assignments whose positive doubled
/// rank sum equals s. Equivalent to full enumeration.
fn exact_p(doubled: &[u64], w_plus: u64, alternative: Alternative) -> f64 {
    let total: u64 = doubled.iter().sum();
    let mut counts = vec![0u64; total as usize + 1];
    counts[0] = 1;
    for &rank in doubled {
        for s in (rank as usize..counts.len()).rev() {
            counts[s] += counts[s - rank as usize];
        }
    }
    let assignments = 2f64.powi(doubled.len() as i32);
    let tail_ge: u64 = counts[w_plus as usize..].iter().sum();
    let tail_le: u64 = counts[..=w_plus as usize].iter().sum();
    let p_greater = tail_ge as f64 / assignments;
    let p_less = tail_le as f64 / assignments;
    match alternative {
        Alternative::Greater => p_greater,
        Alternative::Less => p_less,
        Alternative::TwoSided => 2.0 * p_greater.min(p_less),
    }
}

/// Normal approximation of the positive rank-sum distribution, with the
/// variance reduced for ties and a 0.5-rank continuity correction. Works
/// in doubled-rank units throughout.
fn approximate_p(doubled: &[u64], w_plus: u64, alternative: Alternative) -> f64 {
    let n = doubled.len() as f64;
    let mean = n * (n + 1.0) / 2.0; // doubled units: 2 * n(n+1)/4
    let mut variance = n * (n + 1.0) * (2.0 * n + 1.0) / 6.0; // 4 * n(n+1)(2n+1)/24
    let mut sorted = doubled.to_vec();
    sorted.sort_unstable();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        variance -= t * (t * t - 1.0) / 12.0; // 4 * (t^3 - t)/48
        i = j + 1;
    }
    let std = variance.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let w = w_plus as f64;
    let p_greater = 1.0 - normal.cdf((w - mean - 1.0) / std);
    let p_less = normal.cdf((w - mean + 1.0) / std);
    match alternative {
        Alternative::Greater => p_greater,
        Alternative::Less => p_less,
        Alternative::TwoSided => 2.0 * p_greater.min(p_less),
    }
}
