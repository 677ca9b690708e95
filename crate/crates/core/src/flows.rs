//! Gradient flows on the open simplex.
//!
//! Steps are taken in the exponential chart centred at the current state, so
//! every update is multiplicative and the renormalisation absorbs the
//! cumulant constant. Two closed-form solutions serve as references.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::chart::{e_transport, exp_chart, exp_chart_inv, mix_chart};
use crate::cumulant::cumulant;
use crate::divergence::kl;
use crate::error::{Error, Result};
use crate::simplex::{Fiber, Prob};

/// Weights below this value end an integration with [`Error::PositivityBreach`].
pub const POSITIVITY_FLOOR: f64 = 1e-15;

/// A vector field on the simplex: each value lives in the fiber at its input.
pub trait VectorField {
    fn eval(&self, q: &Prob) -> Result<Fiber>;

    /// Objective monitored along trajectories, if the field has one.
    fn objective(&self, _q: &Prob) -> Result<Option<f64>> {
        Ok(None)
    }
}

impl<F> VectorField for F
where
    F: Fn(&Prob) -> Result<Fiber>,
{
    fn eval(&self, q: &Prob) -> Result<Fiber> {
        self(q)
    }
}

/// The descent field `s_q(r) = -Grad₁ KL(q‖r)` with objective `KL(q‖r)`.
#[derive(Debug, Clone)]
pub struct KlForwardDescent {
    pub target: Prob,
}

impl VectorField for KlForwardDescent {
    fn eval(&self, q: &Prob) -> Result<Fiber> {
        exp_chart(q, &self.target)
    }
    fn objective(&self, q: &Prob) -> Result<Option<f64>> {
        kl(q, &self.target).map(Some)
    }
}

/// The descent field `η_r(q) = -Grad₂ KL(q‖r)` in the state `r`, objective `KL(q‖r)`.
#[derive(Debug, Clone)]
pub struct KlReverseDescent {
    pub source: Prob,
}

impl VectorField for KlReverseDescent {
    fn eval(&self, r: &Prob) -> Result<Fiber> {
        mix_chart(r, &self.source)
    }
    fn objective(&self, r: &Prob) -> Result<Option<f64>> {
        kl(&self.source, r).map(Some)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// `q⁺ ∝ q e^{dt F(q)}`.
    ExpEuler,
    /// Classical Runge–Kutta in the exponential chart at the current state.
    Rk4,
}

#[derive(Debug, Clone, Copy)]
pub struct IntegratorOptions {
    pub scheme: Scheme,
    pub dt: f64,
    pub steps: usize,
    /// Stop once the fiber norm of the field is at or below this value.
    pub stop_grad_norm: f64,
}

impl IntegratorOptions {
    pub fn new(scheme: Scheme, dt: f64, steps: usize) -> Self {
        Self {
            scheme,
            dt,
            steps,
            stop_grad_norm: 0.0,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument("dt must be positive"));
        }
        if self.steps < 1 {
            return Err(Error::InvalidArgument("steps must be at least 1"));
        }
        Ok(())
    }
}

/// Per-state diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub objective: Option<f64>,
    pub grad_norm: f64,
}

/// A time-indexed sequence of states.
#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub diagnostics: Vec<Diagnostics>,
}

impl<S> Trajectory<S> {
    pub fn new() -> Self {
        Self {
            times: Vec::new(),
            states: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, state: S, diag: Diagnostics) {
        self.times.push(t);
        self.states.push(state);
        self.diagnostics.push(diag);
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> Option<&S> {
        self.states.last()
    }
}

impl<S> Default for Trajectory<S> {
    fn default() -> Self {
        Self::new()
    }
}

/// A state whose coordinates can be written out as a flat vector.
pub trait StateVector {
    fn components(&self) -> &[f64];
}

impl StateVector for Prob {
    fn components(&self) -> &[f64] {
        self.weights()
    }
}

impl StateVector for Vec<f64> {
    fn components(&self) -> &[f64] {
        self
    }
}

/// One step of `scheme` from `q`, given the field value `f0 = F(q)`.
pub(crate) fn step<F: VectorField + ?Sized>(
    field: &F,
    q: &Prob,
    f0: &Fiber,
    dt: f64,
    scheme: Scheme,
) -> Result<Prob> {
    match scheme {
        Scheme::ExpEuler => exp_chart_inv(q, &f0.scale(dt)),
        Scheme::Rk4 => {
            let pulled = |v: &Fiber| -> Result<Fiber> {
                let at = exp_chart_inv(q, v)?;
                let f = field.eval(&at)?;
                e_transport(&at, q, &f)
            };
            let k1 = f0.clone();
            let k2 = pulled(&k1.scale(0.5 * dt))?;
            let k3 = pulled(&k2.scale(0.5 * dt))?;
            let k4 = pulled(&k3.scale(dt))?;
            let sum = k1.add(&k2.scale(2.0))?.add(&k3.scale(2.0))?.add(&k4)?;
            exp_chart_inv(q, &sum.scale(dt / 6.0))
        }
    }
}

pub(crate) fn positivity(step: usize, r: Result<Prob>) -> Result<Prob> {
    match r {
        Ok(q) if q.min_weight() < POSITIVITY_FLOOR => Err(Error::PositivityBreach {
            step,
            min_weight: q.min_weight(),
        }),
        Ok(q) => Ok(q),
        Err(Error::NonPositive { value, .. }) => Err(Error::PositivityBreach {
            step,
            min_weight: value,
        }),
        Err(e) => Err(e),
    }
}

/// Integrates `q̇ = F(q)` from `q0`, recording every state.
///
/// The trajectory holds `steps + 1` states unless the field norm drops to
/// `stop_grad_norm` first, in which case it ends at that state.
pub fn integrate<F: VectorField + ?Sized>(
    q0: &Prob,
    field: &F,
    opts: &IntegratorOptions,
) -> Result<Trajectory<Prob>> {
    opts.validate()?;
    let mut traj = Trajectory::new();
    let mut q = q0.clone();
    for k in 0..=opts.steps {
        let f = field.eval(&q)?;
        f.check_base(&q)?;
        let diag = Diagnostics {
            objective: field.objective(&q)?,
            grad_norm: f.norm(),
        };
        let done = k == opts.steps || diag.grad_norm <= opts.stop_grad_norm;
        traj.push(k as f64 * opts.dt, q.clone(), diag);
        if done {
            break;
        }
        q = positivity(k + 1, step(field, &q, &f, opts.dt, opts.scheme))?;
    }
    Ok(traj)
}

/// Closed-form solution of `q̇ = s_q(r)`, `q(0) = q0`:
/// `q(t) = e^{e^{-t} v0 - K_r(e^{-t} v0)} r` with `v0 = s_r(q0)`.
pub fn exp_flow(r: &Prob, q0: &Prob, t: f64) -> Result<Prob> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument("time must be non-negative"));
    }
    let v = exp_chart(r, q0)?.scale((-t).exp());
    let k = cumulant(r, &v)?;
    let masses = r
        .weights()
        .iter()
        .zip(crate::simplex::RandomVariable::values(&v))
        .map(|(w, x)| w * (x - k).exp())
        .collect();
    Prob::from_masses(r.space().clone(), masses)
}

/// Closed-form solution of `ṙ = η_r(q)`, `r(0) = r0`: `e^{-t} r0 + (1 - e^{-t}) q`.
pub fn mix_flow(q: &Prob, r0: &Prob, t: f64) -> Result<Prob> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument("time must be non-negative"));
    }
    q.space().check_same(r0.space())?;
    let a = (-t).exp();
    let masses = r0
        .weights()
        .iter()
        .zip(q.weights())
        .map(|(r, q)| a * r + (1.0 - a) * q)
        .collect();
    Prob::from_masses(q.space().clone(), masses)
}
