//! Deterministic pseudo-random matrices for tests and self-checks.
//!
//! The whole crate has a reproducibility contract: identical inputs give
//! bit-identical outputs. Tests that want "random looking" matrices
//! therefore draw from this fixed linear congruential generator instead of
//! an OS-seeded RNG.

use num_complex::Complex64;

use crate::fock::matrix::ComplexMatrix;

const LCG_MULTIPLIER: u64 = 6364136223846793005;
const LCG_INCREMENT: u64 = 1442695040888963407;

#[derive(Debug, Clone)]
pub struct DetRng {
    state: u64,
}

impl DetRng {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self
            .state
            .wrapping_mul(LCG_MULTIPLIER)
            .wrapping_add(LCG_INCREMENT);
        self.state
    }

    /// Uniform value in [-1, 1) built from the high 53 bits.
    pub fn next_unit(&mut self) -> f64 {
        let bits = self.next_u64() >> 11;
        (bits as f64) / (2f64.powi(52)) - 1.0
    }
}

/// Dense matrix with independent entries uniform in [-1, 1) for both parts.
pub fn general_sample(dim: usize, rng: &mut DetRng) -> ComplexMatrix {
    let mut entries = Vec::with_capacity(dim * dim);
    for _ in 0..dim * dim {
        let re = rng.next_unit();
        let im = rng.next_unit();
        entries.push(Complex64::new(re, im));
    }
    ComplexMatrix::new(dim, entries).expect("entry count matches by construction")
}

/// Hermitian matrix: a general sample folded through (A + A^dag) / 2.
pub fn hermitian_sample(dim: usize, rng: &mut DetRng) -> ComplexMatrix {
    general_sample(dim, rng).hermitize()
}
