//! Seeded sampling helpers shared by the verifiers.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::poly::Complex;

/// Smallest sampled radius as a fraction of the ball radius.
pub const LOG_SPAN: f64 = 1e-6;

/// Independent stream `index` of the generator seeded with `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        return hi;
    }
    (lo.ln() + (hi.ln() - lo.ln()) * rng.gen::<f64>()).exp()
}

pub fn unit(rng: &mut impl Rng) -> Complex {
    Complex::from_polar(1.0, rng.gen_range(0.0..TAU))
}

/// Offset in `B_ρ(0) \ {0}`: radius log-uniform in `[LOG_SPAN·ρ, ρ]`, angle uniform.
pub fn ball_offset(rng: &mut impl Rng, rho: f64) -> Complex {
    log_uniform(rng, LOG_SPAN * rho, rho) * unit(rng)
}

/// Point uniform by area in the closed disc of radius `rho`.
pub fn disc_point(rng: &mut impl Rng, rho: f64) -> Complex {
    rho * rng.gen::<f64>().sqrt() * unit(rng)
}
