//! Brute-force reference implementations.
//!
//! Nothing here calls into the chart, gradient or product-space code; the
//! routines work on raw weight slices so they can cross-check those modules.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::product::JointProb;
use crate::simplex::{Prob, RandomVariable, Rv};

/// Sweep budget of [`sinkhorn_oracle`].
pub const SINKHORN_MAX_SWEEPS: usize = 100_000;

#[derive(Debug, Clone)]
pub struct SinkhornResult {
    pub plan: JointProb,
    pub iterations: usize,
    pub margin_error: f64,
}

/// Entropic transport plan by alternate row/column scaling of `e^{-U/ε} q₁ ⊗ q₂`.
///
/// Stops once both margins match to `tol` in the sup norm.
pub fn sinkhorn_oracle(cost: &Rv, eps: f64, q1: &Prob, q2: &Prob, tol: f64) -> Result<SinkhornResult> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("temperature must be positive"));
    }
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(Error::InvalidArgument("tolerance must lie in (0, 1e-6]"));
    }
    let (a, b) = (q1.weights(), q2.weights());
    let (n1, n2) = (a.len(), b.len());
    let c = cost.values();
    if c.len() != n1 * n2 {
        return Err(Error::LengthMismatch {
            expected: n1 * n2,
            got: c.len(),
        });
    }
    let kernel: Vec<f64> = (0..n1 * n2)
        .map(|k| (-c[k] / eps).exp() * a[k / n2] * b[k % n2])
        .collect();
    let mut u = alloc::vec![1.0; n1];
    let mut v = alloc::vec![1.0; n2];
    let mut err = f64::INFINITY;
    for sweep in 1..=SINKHORN_MAX_SWEEPS {
        for i in 0..n1 {
            let s: f64 = (0..n2).map(|j| kernel[i * n2 + j] * v[j]).sum();
            u[i] = a[i] / s;
        }
        for j in 0..n2 {
            let s: f64 = (0..n1).map(|i| kernel[i * n2 + j] * u[i]).sum();
            v[j] = b[j] / s;
        }
        // columns are exact after the v-update; the row error remains
        err = 0.0;
        for i in 0..n1 {
            let s: f64 = (0..n2).map(|j| u[i] * kernel[i * n2 + j] * v[j]).sum();
            err = err.max((s - a[i]).abs());
        }
        if err <= tol {
            let plan: Vec<f64> = (0..n1 * n2)
                .map(|k| u[k / n2] * kernel[k] * v[k % n2])
                .collect();
            let total: f64 = plan.iter().sum();
            let plan = plan.into_iter().map(|w| w / total).collect();
            return Ok(SinkhornResult {
                plan: JointProb::new(q1.space().clone(), q2.space().clone(), plan)?,
                iterations: sweep,
                margin_error: err,
            });
        }
    }
    Err(Error::NoConvergence {
        sweeps: SINKHORN_MAX_SWEEPS,
        residual: err,
    })
}

/// Direct sums of the divergences between two probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteDivergences {
    pub kl: f64,
    pub cross_entropy: f64,
    pub entropy_q: f64,
    pub js: f64,
}

/// Naive summation of `KL(q‖r)`, `H(q, r)`, `H(q)` and `JS(q, r)`.
pub fn brute_divergences(q: &Prob, r: &Prob) -> Result<BruteDivergences> {
    let (qw, rw) = (q.weights(), r.weights());
    if qw.len() != rw.len() {
        return Err(Error::SpaceMismatch {
            left: qw.len(),
            right: rw.len(),
        });
    }
    let mut kl = 0.0;
    let mut cross = 0.0;
    let mut ent = 0.0;
    let mut js = 0.0;
    for i in 0..qw.len() {
        let (a, b) = (qw[i], rw[i]);
        let m = 0.5 * (a + b);
        kl += a * a.ln() - a * b.ln();
        cross -= a * b.ln();
        ent -= a * a.ln();
        js += 0.5 * a * (a.ln() - m.ln()) + 0.5 * b * (b.ln() - m.ln());
    }
    Ok(BruteDivergences {
        kl,
        cross_entropy: cross,
        entropy_q: ent,
        js,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn zero_cost_gives_independent_plan() {
        let q1 = Prob::from_weights(vec![0.3, 0.7]).unwrap();
        let q2 = Prob::from_weights(vec![0.2, 0.5, 0.3]).unwrap();
        let cost = Rv::constant(crate::simplex::SampleSpace::new(6).unwrap(), 0.0);
        let res = sinkhorn_oracle(&cost, 1.0, &q1, &q2, 1e-12).unwrap();
        assert_eq!(res.iterations, 1);
        for x in 0..2 {
            for y in 0..3 {
                let want = q1.weights()[x] * q2.weights()[y];
                assert!((res.plan.at(x, y) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn invalid_arguments() {
        let q = Prob::from_weights(vec![0.5, 0.5]).unwrap();
        let cost = Rv::constant(crate::simplex::SampleSpace::new(4).unwrap(), 0.0);
        assert!(sinkhorn_oracle(&cost, 0.0, &q, &q, 1e-9).is_err());
        assert!(sinkhorn_oracle(&cost, 1.0, &q, &q, 1e-3).is_err());
    }

    #[test]
    fn brute_divergence_basics() {
        let q = Prob::from_weights(vec![0.9, 0.05, 0.05]).unwrap();
        let r = Prob::from_weights(vec![0.05, 0.05, 0.9]).unwrap();
        assert_eq!(brute_divergences(&q, &q).unwrap().kl, 0.0);
        let d = brute_divergences(&q, &r).unwrap();
        assert!(d.js >= 0.0 && d.js <= 2.0_f64.ln());
    }
}
