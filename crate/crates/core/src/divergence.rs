//! KL divergence, entropy, cross entropy and the Jensen–Shannon divergence.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::Result;
use crate::simplex::Prob;

/// `KL(q‖r) = E_q[log q/r]`.
pub fn kl(q: &Prob, r: &Prob) -> Result<f64> {
    q.space().check_same(r.space())?;
    Ok(q
        .weights()
        .iter()
        .zip(r.weights())
        .map(|(a, b)| a * (a / b).ln())
        .sum())
}

/// `H(q) = -E_q[log q]`.
pub fn entropy(q: &Prob) -> f64 {
    -q.weights().iter().map(|a| a * a.ln()).sum::<f64>()
}

/// `H(q, r) = -E_q[log r]`.
pub fn cross_entropy(q: &Prob, r: &Prob) -> Result<f64> {
    q.space().check_same(r.space())?;
    Ok(-q
        .weights()
        .iter()
        .zip(r.weights())
        .map(|(a, b)| a * b.ln())
        .sum::<f64>())
}

/// The midpoint `½(q + r)`.
pub fn midpoint(q: &Prob, r: &Prob) -> Result<Prob> {
    q.space().check_same(r.space())?;
    let masses: Vec<f64> = q
        .weights()
        .iter()
        .zip(r.weights())
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    Prob::from_masses(q.space().clone(), masses)
}

/// `JS(q, r) = ½ KL(q‖m) + ½ KL(r‖m)` with `m = ½(q + r)`.
pub fn js(q: &Prob, r: &Prob) -> Result<f64> {
    let m = midpoint(q, r)?;
    Ok(0.5 * (kl(q, &m)? + kl(r, &m)?))
}
