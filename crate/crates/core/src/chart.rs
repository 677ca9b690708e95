//! The exponential and mixture charts and their parallel transports.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::simplex::{dot, Fiber, Prob, RandomVariable};

/// Exponential chart `s_p(q) = log(q/p) - E_p[log(q/p)]`, a fiber vector at `p`.
pub fn exp_chart(p: &Prob, q: &Prob) -> Result<Fiber> {
    p.space().check_same(q.space())?;
    let log_ratio: Vec<f64> = q
        .weights()
        .iter()
        .zip(p.weights())
        .map(|(a, b)| (a / b).ln())
        .collect();
    Ok(Fiber::centering(p.clone(), log_ratio))
}

/// Inverse exponential chart `e_p(v) = e^{v - K_p(v)} p`.
pub fn exp_chart_inv(p: &Prob, v: &Fiber) -> Result<Prob> {
    v.check_base(p)?;
    p.tilt(v)
}

/// Mixture chart `η_p(q) = q/p - 1`, a fiber vector at `p`.
pub fn mix_chart(p: &Prob, q: &Prob) -> Result<Fiber> {
    p.space().check_same(q.space())?;
    let values = q
        .weights()
        .iter()
        .zip(p.weights())
        .map(|(a, b)| a / b - 1.0)
        .collect();
    Ok(Fiber::from_parts(p.clone(), values))
}

/// Inverse mixture chart `(1 + w) p`; requires `1 + w > 0` everywhere.
pub fn mix_chart_inv(p: &Prob, w: &Fiber) -> Result<Prob> {
    w.check_base(p)?;
    let mut masses = Vec::with_capacity(p.len());
    for (index, (pi, wi)) in p.weights().iter().zip(w.values()).enumerate() {
        let factor = 1.0 + wi;
        if factor <= 1e-15 {
            return Err(Error::NonPositive {
                index,
                value: factor,
            });
        }
        masses.push(factor * pi);
    }
    Prob::from_masses(p.space().clone(), masses)
}

/// Exponential transport of `v` from the fiber at `q` to the fiber at `r`: `v - E_r[v]`.
pub fn e_transport(q: &Prob, r: &Prob, v: &Fiber) -> Result<Fiber> {
    v.check_base(q)?;
    q.space().check_same(r.space())?;
    Ok(Fiber::centering(r.clone(), v.values().to_vec()))
}

/// Mixture transport of `w` from the fiber at `q` to the fiber at `r`: `(q/r) w`.
pub fn m_transport(q: &Prob, r: &Prob, w: &Fiber) -> Result<Fiber> {
    w.check_base(q)?;
    q.space().check_same(r.space())?;
    let values: Vec<f64> = w
        .values()
        .iter()
        .zip(q.weights().iter().zip(r.weights()))
        .map(|(wi, (qi, ri))| qi / ri * wi)
        .collect();
    // E_r[(q/r) w] = E_q[w] vanishes analytically; strip the rounding residue.
    let mean = dot(r.weights(), &values);
    let values = values.into_iter().map(|v| v - mean).collect();
    Ok(Fiber::from_parts(r.clone(), values))
}
