//! The cumulant functional `K_p(v) = log E_p[e^v]` and its derivatives.
//!
//! On the fiber at `p` it is the restriction of the cumulant generating
//! functional defined for every random variable; [`cumulant`] accepts any
//! random variable, the derivative helpers take a fiber point `v` at `p`.

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::chart::exp_chart_inv;
use crate::error::Result;
use crate::simplex::{cov, expect, max_finite, Fiber, Prob, RandomVariable};

/// `log E_p[e^v]`, evaluated with a max-shift.
pub fn cumulant<V: RandomVariable + ?Sized>(p: &Prob, v: &V) -> Result<f64> {
    p.space().check_same(v.space())?;
    let vals = v.values();
    let shift = max_finite(vals)?;
    let s: f64 = p
        .weights()
        .iter()
        .zip(vals)
        .map(|(w, x)| w * (x - shift).exp())
        .sum();
    Ok(shift + s.ln())
}

/// First derivative `dK_p(v)[h] = E_{e_p(v)}[h]`.
pub fn cumulant_d1<H: RandomVariable + ?Sized>(p: &Prob, v: &Fiber, h: &H) -> Result<f64> {
    let tilted = exp_chart_inv(p, v)?;
    expect(&tilted, h)
}

/// Second derivative `d²K_p(v)[h, k] = Cov_{e_p(v)}(h, k)`.
pub fn cumulant_d2<H, K>(p: &Prob, v: &Fiber, h: &H, k: &K) -> Result<f64>
where
    H: RandomVariable + ?Sized,
    K: RandomVariable + ?Sized,
{
    let tilted = exp_chart_inv(p, v)?;
    cov(&tilted, h, k)
}
