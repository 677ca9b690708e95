#![allow(dead_code)]

use infogeo_core::{center, Fiber, JointProb, Prob, Rv, SampleSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Weights `e^{spread (2U - 1)}`, normalized.
pub fn prob_spread(rng: &mut ChaCha8Rng, n: usize, spread: f64) -> Prob {
    let w: Vec<f64> = (0..n).map(|_| (spread * (2.0 * rng.random::<f64>() - 1.0)).exp()).collect();
    Prob::from_masses(SampleSpace::new(n).unwrap(), w).unwrap()
}

pub fn prob(rng: &mut ChaCha8Rng, n: usize) -> Prob {
    prob_spread(rng, n, 1.5)
}

pub fn joint(rng: &mut ChaCha8Rng, n1: usize, n2: usize) -> JointProb {
    JointProb::from_prob(n1, n2, prob(rng, n1 * n2)).unwrap()
}

pub fn rv(rng: &mut ChaCha8Rng, space: &SampleSpace) -> Rv {
    let v = (0..space.size()).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
    Rv::new(space.clone(), v).unwrap()
}

pub fn fiber(rng: &mut ChaCha8Rng, base: &Prob) -> Fiber {
    center(base, &rv(rng, base.space())).unwrap()
}

pub fn size(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> usize {
    rng.random_range(lo..=hi)
}

/// Sup-norm comparison relative to the size of the reference.
pub fn rel_sup(a: &[f64], b: &[f64]) -> f64 {
    let scale = 1.0 + a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}
