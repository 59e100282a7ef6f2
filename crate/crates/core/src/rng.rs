//! Deterministic random number generation.
//!
//! Every random draw in this crate flows through [`Rng`], a fixed
//! xoshiro256++ generator seeded via splitmix64. The algorithms are pinned
//! here rather than borrowed from an external crate so that seeded runs
//! reproduce bit-for-bit across platforms and dependency upgrades.

/// splitmix64 step, used for seeding and stream derivation.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// xoshiro256++ generator with a cached Gaussian spare.
#[derive(Debug, Clone)]
pub struct Rng {
    s: [u64; 4],
    gauss_spare: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Rng {
            s,
            gauss_spare: None,
        }
    }

    /// Derives an independent stream from a base seed and a stream index.
    /// Distinct (seed, index) pairs give unrelated sequences.
    pub fn new_stream(seed: u64, index: u64) -> Self {
        let mut sm = seed;
        let a = splitmix64(&mut sm);
        let mut sm2 = index.wrapping_mul(0xA076_1D64_78BD_642F).wrapping_add(1);
        let b = splitmix64(&mut sm2);
        Rng::new(a ^ b)
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[0]
            .wrapping_add(self.s[3])
            .rotate_left(23)
            .wrapping_add(self.s[0]);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in [0, n). Rejection-free widening multiply would be
    /// biased for huge n; n here is always small (class/category counts).
    pub fn next_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        (((self.next_u64() >> 11) as u128 * n as u128) >> 53) as u64
    }

    /// Standard normal via Box-Muller; the unused pair member is cached.
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.gauss_spare.take() {
            return z;
        }
        // u in (0, 1] so ln is finite.
        let u = 1.0 - self.next_f64();
        let v = self.next_f64();
        let r = (-2.0 * u.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * v;
        self.gauss_spare = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Poisson(lambda) draw. Knuth's product method for small lambda,
    /// sequential CDF inversion above that, and additive chunking once
    /// exp(-lambda) would underflow.
    pub fn next_poisson(&mut self, lambda: f64) -> u64 {
        assert!(
            lambda >= 0.0 && lambda.is_finite(),
            "poisson rate must be finite and non-negative, got {lambda}"
        );
        if lambda == 0.0 {
            return 0;
        }
        if lambda > 500.0 {
            return self.next_poisson(500.0) + self.next_poisson(lambda - 500.0);
        }
        if lambda <= 10.0 {
            let limit = (-lambda).exp();
            let mut product = self.next_f64();
            let mut count = 0u64;
            while product > limit {
                product *= self.next_f64();
                count += 1;
            }
            count
        } else {
            let u = self.next_f64();
            let mut k = 0u64;
            let mut p = (-lambda).exp();
            let mut cdf = p;
            while u > cdf {
                k += 1;
                p *= lambda / k as f64;
                cdf += p;
                if p < f64::MIN_POSITIVE && cdf >= 1.0 {
                    break;
                }
            }
            k
        }
    }
}
