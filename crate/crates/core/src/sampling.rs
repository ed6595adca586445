//! Seeded generation of generic spectral points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::tensor::C64;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A complex point off the real axis, |Re| ≤ 1.2 and 0.3 ≤ |Im| ≤ 1.2.
pub fn generic_point(rng: &mut ChaCha8Rng) -> C64 {
    let re = rng.random_range(-1.2..1.2);
    let im = rng.random_range(0.3..1.2);
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    C64::new(re, sign * im)
}

/// `count` generic points, each accepted only if `accept` holds.
pub fn generic_points(rng: &mut ChaCha8Rng, count: usize, mut accept: impl FnMut(C64) -> bool) -> Vec<C64> {
    let mut out = Vec::with_capacity(count);
    let mut tries = 0usize;
    while out.len() < count {
        let u = generic_point(rng);
        tries += 1;
        if accept(u) || tries > 1000 * (count + 1) {
            out.push(u);
        }
    }
    out
}

pub fn gaussian_complex(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}
