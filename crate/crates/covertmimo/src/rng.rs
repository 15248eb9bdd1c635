//! Seeded random streams used by the Monte Carlo drivers.
//!
//! Every stochastic routine in the crate takes either an explicit `Rng` or a
//! `(seed, stream)` pair, so results are reproducible bit for bit regardless
//! of how callers schedule the work.

use num_complex::Complex64;
// The trait supplies the float math in no_std builds; test builds link
// std, whose inherent methods shadow it.
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Deterministic stream `index` derived from a 64-bit master seed.
pub fn stream(seed: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One standard normal pair via the Box-Muller transform.
pub fn normal_pair(rng: &mut impl Rng) -> (f64, f64) {
    // 1 - u keeps the argument of ln strictly positive.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (core::f64::consts::TAU * u2).sin_cos();
    (r * c, r * s)
}

/// Standard circularly symmetric complex Gaussian, `E|z|^2 = 1`.
pub fn standard_complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    let (x, y) = normal_pair(rng);
    Complex64::new(x, y).scale(core::f64::consts::FRAC_1_SQRT_2)
}
