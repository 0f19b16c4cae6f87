//! Seeded random sampling for model families.
//!
//! The generator is xoshiro256** seeded through SplitMix64 (the reference
//! seeding of its authors), so a seed reproduces the same stream in any
//! language with a conforming implementation. Uniform doubles take the top
//! 53 bits: `(next_u64() >> 11) · 2⁻⁵³`.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::linalg::Complex64;

#[derive(Debug, Clone)]
pub struct ModelRng(Xoshiro256StarStar);

impl ModelRng {
    pub fn new(seed: u64) -> Self {
        ModelRng(Xoshiro256StarStar::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[-1, 1)`.
    pub fn symmetric(&mut self) -> f64 {
        2.0 * self.uniform() - 1.0
    }

    /// Real and imaginary parts independently uniform on `[-1, 1)`.
    pub fn complex(&mut self) -> Complex64 {
        let re = self.symmetric();
        let im = self.symmetric();
        Complex64::new(re, im)
    }
}
