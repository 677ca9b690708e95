//! Seeded random problem instances.
//!
//! All randomness comes from ChaCha8 streams: the master seed selects the key
//! and every independent consumer (e.g. a gradient-check trial) gets its own
//! stream number, so results do not depend on scheduling.

use infogeo_core::{center, Fiber, JointProb, Prob, Rv, SampleSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Log-ratio half-width of generated weights: `max/min ≤ e^{2 SPREAD}`.
pub const SPREAD: f64 = 1.0;

/// Generator for stream `stream` of the master `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Weights `e^{spread (2U - 1)}`, normalized.
pub fn prob_with_spread(rng: &mut ChaCha8Rng, n: usize, spread: f64) -> Prob {
    let masses = (0..n).map(|_| (spread * (2.0 * rng.random::<f64>() - 1.0)).exp()).collect();
    Prob::from_masses(SampleSpace::new(n).expect("n >= 2"), masses).expect("positive masses")
}

pub fn prob(rng: &mut ChaCha8Rng, n: usize) -> Prob {
    prob_with_spread(rng, n, SPREAD)
}

pub fn joint(rng: &mut ChaCha8Rng, n1: usize, n2: usize) -> JointProb {
    JointProb::from_prob(n1, n2, prob(rng, n1 * n2)).expect("shape")
}

/// Values uniform on `[-1, 1)`.
pub fn rv(rng: &mut ChaCha8Rng, space: &SampleSpace) -> Rv {
    let values = (0..space.size()).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
    Rv::new(space.clone(), values).expect("finite values")
}

pub fn fiber(rng: &mut ChaCha8Rng, base: &Prob) -> Fiber {
    center(base, &rv(rng, base.space())).expect("same space")
}

/// Uniform integer in `lo..=hi`.
pub fn size(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> usize {
    rng.random_range(lo..=hi)
}
