//! Deterministic sample points and random polynomial parameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weylforge_core::{Scalar, Q};

/// Seeded source of rational sample values. Exact and float runs with the
/// same seed see the same points.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Sampler { rng }
    }

    /// `n / d` with `|n| ≤ 24`, `1 ≤ d ≤ 8`.
    pub fn rational(&mut self) -> Q {
        let n = self.rng.gen_range(-24i64..=24);
        let d = self.rng.gen_range(1i64..=8);
        Q::new(n, d)
    }

    pub fn nonzero(&mut self) -> Q {
        loop {
            let q = self.rational();
            if !q.is_zero() {
                return q;
            }
        }
    }

    pub fn point<S: Scalar, const N: usize>(&mut self) -> [S; N] {
        core::array::from_fn(|_| S::from_q(&self.rational()))
    }

    pub fn small_int(&mut self, bound: i64) -> i64 {
        self.rng.gen_range(-bound..=bound)
    }

    /// A random polynomial in `var` of degree `≤ degree` with small
    /// integer or half-integer coefficients, never identically zero.
    pub fn polynomial(&mut self, var: &str, degree: usize) -> String {
        loop {
            let mut terms = Vec::new();
            for k in 0..=degree {
                let c = self.small_int(3);
                if c == 0 {
                    continue;
                }
                let coeff = if self.rng.gen_bool(0.25) {
                    format!("({c}/2)")
                } else {
                    format!("({c})")
                };
                terms.push(match k {
                    0 => coeff,
                    1 => format!("{coeff}*{var}"),
                    _ => format!("{coeff}*{var}^{k}"),
                });
            }
            if !terms.is_empty() {
                return terms.join(" + ");
            }
        }
    }
}
