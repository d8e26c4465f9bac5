//! Reproducible random streams for problem instances.
//!
//! Instances are drawn from xoshiro256++ seeded through SplitMix64
//! (`Xoshiro256PlusPlus::seed_from_u64`). Normal variates use the basic
//! Box–Muller transform on two consecutive uniforms
//!
//! ```text
//! u1 = ((next_u64 >> 11) + 1) * 2^-53      in (0, 1]
//! u2 =  (next_u64 >> 11)      * 2^-53      in [0, 1)
//! z0 = sqrt(-2 ln u1) * cos(2 pi u2)
//! z1 = sqrt(-2 ln u1) * sin(2 pi u2)
//! ```
//!
//! and both outputs are consumed, `z0` first. Any implementation following
//! these three lines reproduces the same instances bit for bit (up to the
//! platform's `ln`, `cos` and `sin`).

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

/// Standard-normal stream used for instance generation.
pub struct NormalStream {
    rng: Xoshiro256PlusPlus,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * TWO_POW_M53
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = ((self.rng.next_u64() >> 11) + 1) as f64 * TWO_POW_M53;
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }

    pub fn normals(&mut self, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.next_normal()).collect()
    }
}
