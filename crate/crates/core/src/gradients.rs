//! Natural gradients of divergence functionals and a finite-difference oracle.
//!
//! A natural gradient of `Φ` at `q` is the fiber vector `G` with
//! `d/dt Φ(q(t)) = <G, q̇>_q` for every curve through `q` with velocity
//! (score) `q̇`. Two-argument functionals return a [`GradPair`], one component
//! per argument, each living in the fiber of its own base point.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::chart::{exp_chart, exp_chart_inv, mix_chart};
use crate::divergence::{cross_entropy, entropy, midpoint};
use crate::error::{Error, Result};
use crate::linalg::solve_spd;
use crate::simplex::{center, Fiber, Prob, RandomVariable};

/// Step used by [`fd_natural_grad`] when callers have no better choice.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Total natural gradient of a two-argument functional.
#[derive(Debug, Clone)]
pub struct GradPair {
    /// Component in the fiber at the first argument.
    pub first: Fiber,
    /// Component in the fiber at the second argument.
    pub second: Fiber,
}

/// `Grad E_q[u] = u - E_q[u]`.
pub fn grad_expect<U: RandomVariable + ?Sized>(q: &Prob, u: &U) -> Result<Fiber> {
    center(q, u)
}

/// Total natural gradient of `KL(q‖r)`: `(-s_q(r), -η_r(q))`.
pub fn grad_kl_total(q: &Prob, r: &Prob) -> Result<GradPair> {
    Ok(GradPair {
        first: exp_chart(q, r)?.scale(-1.0),
        second: mix_chart(r, q)?.scale(-1.0),
    })
}

/// Total natural gradient of the cross entropy `H(q, r)`.
///
/// The first slot is `-log r - H(q, r)`. The entropy of `q` does not depend on
/// `r`, so the second slot coincides with the KL one, `-η_r(q)`.
pub fn grad_cross_entropy_total(q: &Prob, r: &Prob) -> Result<GradPair> {
    let h = cross_entropy(q, r)?;
    let first = r.log().values().iter().map(|l| -l - h).collect();
    Ok(GradPair {
        first: Fiber::from_parts(q.clone(), first),
        second: mix_chart(r, q)?.scale(-1.0),
    })
}

/// `Grad H(q) = -log q - H(q)`.
pub fn grad_entropy(q: &Prob) -> Fiber {
    let h = entropy(q);
    let values = q.weights().iter().map(|w| -w.ln() - h).collect();
    Fiber::from_parts(q.clone(), values)
}

/// Gradient of `q ↦ JS(q, r)`: `-½ s_q(½(q + r))`.
pub fn grad_js(q: &Prob, r: &Prob) -> Result<Fiber> {
    let m = midpoint(q, r)?;
    Ok(exp_chart(q, &m)?.scale(-0.5))
}

/// Gradient of `p ↦ ½(KL(q‖p) + KL(r‖p))`: `-½(η_p(q) + η_p(r))`.
///
/// Vanishes exactly at the midpoint `p = ½(q + r)`.
pub fn grad_phi_mixture_center(p: &Prob, q: &Prob, r: &Prob) -> Result<Fiber> {
    mix_chart(p, q)?.add(&mix_chart(p, r)?).map(|s| s.scale(-0.5))
}

/// Natural gradient of `phi` at `q` recovered from central differences.
///
/// Each coordinate direction `b_k = 1_{x_k} - q(x_k)`, `k < n - 1`, is followed
/// along the exponential curve `e_q(t b_k)`; the directional derivatives are
/// turned into a fiber vector by solving the covariance Gram system.
pub fn fd_natural_grad<F>(phi: F, q: &Prob, eps: f64) -> Result<Fiber>
where
    F: Fn(&Prob) -> Result<f64>,
{
    if !(eps > 0.0 && eps <= 1e-2) {
        return Err(Error::InvalidArgument("finite-difference step must lie in (0, 1e-2]"));
    }
    let n = q.len();
    let m = n - 1;
    let w = q.weights();
    let basis: Vec<Fiber> = (0..m)
        .map(|k| {
            let values = (0..n)
                .map(|x| if x == k { 1.0 - w[k] } else { -w[k] })
                .collect();
            Fiber::from_parts(q.clone(), values)
        })
        .collect();

    let mut d = Vec::with_capacity(m);
    for b in &basis {
        let plus = exp_chart_inv(q, &b.scale(eps))?;
        let minus = exp_chart_inv(q, &b.scale(-eps))?;
        d.push((phi(&plus)? - phi(&minus)?) / (2.0 * eps));
    }

    // <b_j, b_k>_q = q_j δ_jk - q_j q_k
    let mut gram = alloc::vec![0.0; m * m];
    for j in 0..m {
        for k in 0..m {
            gram[j * m + k] = if j == k { w[j] } else { 0.0 } - w[j] * w[k];
        }
    }
    let coef = solve_spd(&gram, m, &d)?;

    let mut values = alloc::vec![0.0; n];
    for (c, b) in coef.iter().zip(&basis) {
        for (v, bv) in values.iter_mut().zip(b.values()) {
            *v += c * bv;
        }
    }
    Ok(Fiber::centering(q.clone(), values))
}
