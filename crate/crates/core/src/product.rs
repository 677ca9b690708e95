//! Product sample spaces `Ω₁ × Ω₂`.
//!
//! Margins and conditional expectations, the mean-field map `r ↦ r₁ ⊗ r₂`
//! and its derivative, the ANOVA split of a random variable into simple
//! effects and an interaction, and the Kantorovich and Schrödinger problems
//! over transport plans with fixed margins.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::chart::{exp_chart, mix_chart};
use crate::cumulant::cumulant;
use crate::divergence::kl;
use crate::error::{Error, Result};
use crate::flows::{
    positivity, step, Diagnostics, IntegratorOptions, StateVector, Trajectory, VectorField,
};
use crate::linalg::solve_spd;
use crate::simplex::{center, expect, Fiber, Prob, RandomVariable, Rv, SampleSpace};

/// Which factor of the product space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    First,
    Second,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::First => Axis::Second,
            Axis::Second => Axis::First,
        }
    }
}

/// A strictly positive probability on `Ω₁ × Ω₂`, stored row-major.
#[derive(Debug, Clone)]
pub struct JointProb {
    space1: SampleSpace,
    space2: SampleSpace,
    joint: Prob,
}

impl JointProb {
    /// `weights[x * n2 + y]` is the mass of `(x, y)`.
    pub fn new(space1: SampleSpace, space2: SampleSpace, weights: Vec<f64>) -> Result<Self> {
        let space = SampleSpace::new(space1.size() * space2.size())?;
        let joint = Prob::new(space, weights)?;
        Ok(Self {
            space1,
            space2,
            joint,
        })
    }

    pub fn from_weights(n1: usize, n2: usize, weights: Vec<f64>) -> Result<Self> {
        Self::new(SampleSpace::new(n1)?, SampleSpace::new(n2)?, weights)
    }

    /// Reinterprets a probability on `n1 * n2` atoms as a joint.
    pub fn from_prob(n1: usize, n2: usize, joint: Prob) -> Result<Self> {
        let space1 = SampleSpace::new(n1)?;
        let space2 = SampleSpace::new(n2)?;
        if joint.len() != n1 * n2 {
            return Err(Error::LengthMismatch {
                expected: n1 * n2,
                got: joint.len(),
            });
        }
        Ok(Self {
            space1,
            space2,
            joint,
        })
    }

    /// The product `q1 ⊗ q2`.
    pub fn product(q1: &Prob, q2: &Prob) -> Result<Self> {
        let masses = q1
            .weights()
            .iter()
            .flat_map(|a| q2.weights().iter().map(move |b| a * b))
            .collect();
        let space = SampleSpace::new(q1.len() * q2.len())?;
        Ok(Self {
            space1: q1.space().clone(),
            space2: q2.space().clone(),
            joint: Prob::from_masses(space, masses)?,
        })
    }

    fn with_prob(&self, joint: Prob) -> Self {
        Self {
            space1: self.space1.clone(),
            space2: self.space2.clone(),
            joint,
        }
    }

    pub fn n1(&self) -> usize {
        self.space1.size()
    }

    pub fn n2(&self) -> usize {
        self.space2.size()
    }

    pub fn space1(&self) -> &SampleSpace {
        &self.space1
    }

    pub fn space2(&self) -> &SampleSpace {
        &self.space2
    }

    pub fn factor_space(&self, axis: Axis) -> &SampleSpace {
        match axis {
            Axis::First => &self.space1,
            Axis::Second => &self.space2,
        }
    }

    /// The joint as a probability on the flattened space.
    pub fn prob(&self) -> &Prob {
        &self.joint
    }

    pub fn weights(&self) -> &[f64] {
        self.joint.weights()
    }

    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.joint.weights()[x * self.n2() + y]
    }

    pub(crate) fn same_shape(&self, other: &JointProb) -> Result<()> {
        if self.space1 == other.space1 && self.space2 == other.space2 {
            Ok(())
        } else {
            Err(Error::SpaceMismatch {
                left: self.joint.len(),
                right: other.joint.len(),
            })
        }
    }

    /// A random variable on the joint from one depending on a single factor.
    pub fn lift<F: RandomVariable + ?Sized>(&self, axis: Axis, f: &F) -> Result<Rv> {
        self.factor_space(axis).check_same(f.space())?;
        let (n1, n2) = (self.n1(), self.n2());
        let fv = f.values();
        let values = (0..n1 * n2)
            .map(|k| match axis {
                Axis::First => fv[k / n2],
                Axis::Second => fv[k % n2],
            })
            .collect();
        Ok(Rv::from_parts(self.joint.space().clone(), values))
    }

    /// Builds a joint random variable from `f(x, y)`.
    pub fn rv_from_fn(&self, f: impl Fn(usize, usize) -> f64) -> Result<Rv> {
        let n2 = self.n2();
        let values = (0..self.joint.len()).map(|k| f(k / n2, k % n2)).collect();
        Rv::new(self.joint.space().clone(), values)
    }
}

impl StateVector for JointProb {
    fn components(&self) -> &[f64] {
        self.joint.weights()
    }
}

/// Margin of `r` on the factor `axis`.
pub fn marginal(r: &JointProb, axis: Axis) -> Prob {
    let (n1, n2) = (r.n1(), r.n2());
    let w = r.weights();
    let masses: Vec<f64> = match axis {
        Axis::First => (0..n1).map(|x| w[x * n2..(x + 1) * n2].iter().sum()).collect(),
        Axis::Second => (0..n2).map(|y| (0..n1).map(|x| w[x * n2 + y]).sum()).collect(),
    };
    Prob::from_masses(r.factor_space(axis).clone(), masses)
        .expect("margins of a positive joint are positive")
}

/// Conditional expectation `E_r[v | Π_axis]` as a random variable on that factor.
pub fn condexp<V: RandomVariable + ?Sized>(r: &JointProb, v: &V, axis: Axis) -> Result<Rv> {
    r.joint.space().check_same(v.space())?;
    let (n1, n2) = (r.n1(), r.n2());
    let w = r.weights();
    let vv = v.values();
    let values = match axis {
        Axis::First => (0..n1)
            .map(|x| {
                let row = x * n2..(x + 1) * n2;
                let mass: f64 = w[row.clone()].iter().sum();
                w[row.clone()].iter().zip(&vv[row]).map(|(a, b)| a * b).sum::<f64>() / mass
            })
            .collect(),
        Axis::Second => (0..n2)
            .map(|y| {
                let mass: f64 = (0..n1).map(|x| w[x * n2 + y]).sum();
                (0..n1).map(|x| w[x * n2 + y] * vv[x * n2 + y]).sum::<f64>() / mass
            })
            .collect(),
    };
    Ok(Rv::from_parts(r.factor_space(axis).clone(), values))
}

/// Derivative of the marginalization: `(r, ṙ) ↦ (r_axis, E_r[ṙ | Π_axis])`.
pub fn d_marginalization(r: &JointProb, rdot: &Fiber, axis: Axis) -> Result<Fiber> {
    rdot.check_base(&r.joint)?;
    let ce = condexp(r, rdot, axis)?;
    center(&marginal(r, axis), &ce)
}

/// The mean-field approximation `r₁ ⊗ r₂`.
pub fn mean_field(r: &JointProb) -> JointProb {
    JointProb::product(&marginal(r, Axis::First), &marginal(r, Axis::Second))
        .expect("product of positive margins is positive")
}

/// Derivative of the mean-field map: `E_r[ṙ|Π₁] + E_r[ṙ|Π₂]`, based at `r₁ ⊗ r₂`.
pub fn d_mean_field(r: &JointProb, rdot: &Fiber) -> Result<Fiber> {
    rdot.check_base(&r.joint)?;
    let pi = mean_field(r);
    let sum = additive(r, &condexp(r, rdot, Axis::First)?, &condexp(r, rdot, Axis::Second)?)?;
    center(&pi.joint, &sum)
}

fn additive(r: &JointProb, f: &Rv, g: &Rv) -> Result<Rv> {
    let a = r.lift(Axis::First, f)?;
    let b = r.lift(Axis::Second, g)?;
    Ok(Rv::from_parts(
        r.joint.space().clone(),
        a.values().iter().zip(b.values()).map(|(x, y)| x + y).collect(),
    ))
}

/// Mutual information `KL(r‖r₁ ⊗ r₂)`.
pub fn mutual_information(r: &JointProb) -> f64 {
    kl(&r.joint, &mean_field(r).joint).expect("same space")
}

/// Natural gradient of `r ↦ KL(r₁ ⊗ r₂‖r)`, centered at `r`.
pub fn grad_kl_meanfield_fwd(r: &JointProb) -> Result<Fiber> {
    let pi = mean_field(r);
    let s = exp_chart(&r.joint, &pi.joint)?;
    let e1 = condexp(&pi, &s, Axis::First)?;
    let e2 = condexp(&pi, &s, Axis::Second)?;
    let eta = mix_chart(&r.joint, &pi.joint)?;
    let sum = additive(r, &e1, &e2)?;
    let values: Vec<f64> = sum.values().iter().zip(eta.values()).map(|(a, b)| a - b).collect();
    center(&r.joint, &Rv::from_parts(r.joint.space().clone(), values))
}

/// Natural gradient of the mutual information `r ↦ KL(r‖r₁ ⊗ r₂)`.
pub fn grad_kl_meanfield_rev(r: &JointProb) -> Result<Fiber> {
    let pi = mean_field(r);
    let s = exp_chart(&r.joint, &pi.joint)?;
    let eta = mix_chart(&r.joint, &pi.joint)?;
    let e1 = condexp(r, &eta, Axis::First)?;
    let e2 = condexp(r, &eta, Axis::Second)?;
    let sum = additive(r, &e1, &e2)?;
    let values: Vec<f64> = sum.values().iter().zip(s.values()).map(|(a, b)| a - b).collect();
    center(&r.joint, &Rv::from_parts(r.joint.space().clone(), values))
}

/// Which divergence between `r` and `r₁ ⊗ r₂` a [`MeanFieldDescent`] decreases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanFieldDirection {
    /// `KL(r₁ ⊗ r₂‖r)`.
    Forward,
    /// `KL(r‖r₁ ⊗ r₂)`, the mutual information.
    Reverse,
}

/// Steepest-descent field of a mean-field divergence on flattened joints.
#[derive(Debug, Clone, Copy)]
pub struct MeanFieldDescent {
    pub n1: usize,
    pub n2: usize,
    pub direction: MeanFieldDirection,
}

impl VectorField for MeanFieldDescent {
    fn eval(&self, q: &Prob) -> Result<Fiber> {
        let r = JointProb::from_prob(self.n1, self.n2, q.clone())?;
        let g = match self.direction {
            MeanFieldDirection::Forward => grad_kl_meanfield_fwd(&r)?,
            MeanFieldDirection::Reverse => grad_kl_meanfield_rev(&r)?,
        };
        Ok(g.scale(-1.0))
    }

    fn objective(&self, q: &Prob) -> Result<Option<f64>> {
        let r = JointProb::from_prob(self.n1, self.n2, q.clone())?;
        let v = match self.direction {
            MeanFieldDirection::Forward => kl(&mean_field(&r).joint, &r.joint)?,
            MeanFieldDirection::Reverse => mutual_information(&r),
        };
        Ok(Some(v))
    }
}

/// ANOVA split `u = mean + effect1(x) + effect2(y) + interaction(x, y)` under `base`.
#[derive(Debug, Clone)]
pub struct AnovaParts {
    pub mean: f64,
    pub effect1: Rv,
    pub effect2: Rv,
    pub interaction: Rv,
    pub base: JointProb,
}

impl AnovaParts {
    /// `mean + effect1 + effect2 + interaction` on the joint.
    pub fn reconstruct(&self) -> Rv {
        let e1 = self.base.lift(Axis::First, &self.effect1).expect("shape");
        let e2 = self.base.lift(Axis::Second, &self.effect2).expect("shape");
        let values = e1
            .values()
            .iter()
            .zip(e2.values())
            .zip(self.interaction.values())
            .map(|((a, b), c)| self.mean + a + b + c)
            .collect();
        Rv::from_parts(self.base.joint.space().clone(), values)
    }
}

/// ANOVA decomposition of `u` under `q`.
///
/// The simple effects are the `L²(q)` projection of `u - E_q[u]` onto
/// `{f(x) + g(y) : E_{q₁} f = E_{q₂} g = 0}`; the interaction is the residual.
/// For a product `q` the effects are the centered conditional expectations.
pub fn anova<U: RandomVariable + ?Sized>(q: &JointProb, u: &U) -> Result<AnovaParts> {
    q.joint.space().check_same(u.space())?;
    let (n1, n2) = (q.n1(), q.n2());
    let q1 = marginal(q, Axis::First);
    let q2 = marginal(q, Axis::Second);
    let (w1, w2) = (q1.weights(), q2.weights());
    let w = q.weights();
    let mean = expect(&q.joint, u)?;
    let uv = u.values();

    // Basis: 1{x=i} - q1(i) for i < n1-1, then 1{y=j} - q2(j) for j < n2-1.
    let (m1, m2) = (n1 - 1, n2 - 1);
    let m = m1 + m2;
    let mut gram = vec![0.0; m * m];
    for i in 0..m1 {
        for k in 0..m1 {
            gram[i * m + k] = if i == k { w1[i] } else { 0.0 } - w1[i] * w1[k];
        }
        for j in 0..m2 {
            let c = w[i * n2 + j] - w1[i] * w2[j];
            gram[i * m + m1 + j] = c;
            gram[(m1 + j) * m + i] = c;
        }
    }
    for j in 0..m2 {
        for l in 0..m2 {
            gram[(m1 + j) * m + m1 + l] = if j == l { w2[j] } else { 0.0 } - w2[j] * w2[l];
        }
    }
    let mut rhs = vec![0.0; m];
    for i in 0..m1 {
        let row: f64 = (0..n2).map(|y| w[i * n2 + y] * uv[i * n2 + y]).sum();
        rhs[i] = row - w1[i] * mean;
    }
    for j in 0..m2 {
        let col: f64 = (0..n1).map(|x| w[x * n2 + j] * uv[x * n2 + j]).sum();
        rhs[m1 + j] = col - w2[j] * mean;
    }
    let coef = solve_spd(&gram, m, &rhs)?;

    let shift1: f64 = (0..m1).map(|i| coef[i] * w1[i]).sum();
    let shift2: f64 = (0..m2).map(|j| coef[m1 + j] * w2[j]).sum();
    let effect1: Vec<f64> = (0..n1)
        .map(|x| if x < m1 { coef[x] } else { 0.0 } - shift1)
        .collect();
    let effect2: Vec<f64> = (0..n2)
        .map(|y| if y < m2 { coef[m1 + y] } else { 0.0 } - shift2)
        .collect();
    let interaction = (0..n1 * n2)
        .map(|k| uv[k] - mean - effect1[k / n2] - effect2[k % n2])
        .collect();
    Ok(AnovaParts {
        mean,
        effect1: Rv::from_parts(q.space1.clone(), effect1),
        effect2: Rv::from_parts(q.space2.clone(), effect2),
        interaction: Rv::from_parts(q.joint.space().clone(), interaction),
        base: q.clone(),
    })
}

/// Interaction part of `v`, as a fiber vector at `q`.
pub fn interaction_part<V: RandomVariable + ?Sized>(q: &JointProb, v: &V) -> Result<Fiber> {
    let parts = anova(q, v)?;
    center(&q.joint, &parts.interaction)
}

/// Gradient of the expected cost `q ↦ E_q[U]` restricted to transport plans:
/// the interaction part of `U - E_q[U]`.
pub fn kantorovich_grad<U: RandomVariable + ?Sized>(q: &JointProb, cost: &U) -> Result<Fiber> {
    interaction_part(q, cost)
}

/// Entropic transport problem with cost `U`, temperature `ε` and fixed margins.
#[derive(Debug, Clone)]
pub struct SchrodingerProblem {
    cost: Rv,
    epsilon: f64,
    margins: (Prob, Prob),
    log_normalizer: f64,
}

impl SchrodingerProblem {
    pub fn new(cost: Rv, epsilon: f64, q1: Prob, q2: Prob) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument("temperature must be positive"));
        }
        let reference = JointProb::product(&q1, &q2)?;
        let scaled = cost.map(|c| -c / epsilon);
        let log_normalizer = cumulant(&reference.joint, &scaled)?;
        Ok(Self {
            cost,
            epsilon,
            margins: (q1, q2),
            log_normalizer,
        })
    }

    pub fn cost(&self) -> &Rv {
        &self.cost
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn margins(&self) -> (&Prob, &Prob) {
        (&self.margins.0, &self.margins.1)
    }

    /// `ψ(ε) = log E_{q₁⊗q₂}[e^{-U/ε}]`.
    pub fn log_normalizer(&self) -> f64 {
        self.log_normalizer
    }

    /// The product of the prescribed margins, the natural starting plan.
    pub fn independent_plan(&self) -> JointProb {
        JointProb::product(&self.margins.0, &self.margins.1).expect("positive margins")
    }

    fn check(&self, q: &JointProb) -> Result<()> {
        self.margins.0.space().check_same(q.space1())?;
        self.margins.1.space().check_same(q.space2())?;
        Ok(())
    }
}

/// `S_ε(q) = KL(q‖e^{-U/ε - ψ(ε)} · (q₁ ⊗ q₂))` with `q₁ ⊗ q₂` the mean field of `q`.
pub fn schrodinger_objective(prob: &SchrodingerProblem, q: &JointProb) -> Result<f64> {
    prob.check(q)?;
    let pi = mean_field(q);
    let eps = prob.epsilon;
    let psi = prob.log_normalizer;
    Ok(q
        .weights()
        .iter()
        .zip(pi.weights())
        .zip(prob.cost.values())
        .map(|((a, b), u)| a * ((a / b).ln() + u / eps + psi))
        .sum())
}

/// Natural gradient of [`schrodinger_objective`]:
/// `ε⁻¹(U - E_q U) - s_q(q₁⊗q₂) + E_q[η_q(q₁⊗q₂)|Π₁] + E_q[η_q(q₁⊗q₂)|Π₂]`.
pub fn schrodinger_grad(prob: &SchrodingerProblem, q: &JointProb) -> Result<Fiber> {
    prob.check(q)?;
    let cost = center(&q.joint, &prob.cost)?.scale(1.0 / prob.epsilon);
    cost.add(&grad_kl_meanfield_rev(q)?)
}

/// Rescales rows and columns of `q` until its margins match `(q1, q2)`.
pub fn ipf(q: &JointProb, q1: &Prob, q2: &Prob, tol: f64, max_sweeps: usize) -> Result<JointProb> {
    q1.space().check_same(q.space1())?;
    q2.space().check_same(q.space2())?;
    let (n1, n2) = (q.n1(), q.n2());
    let mut w = q.weights().to_vec();
    let mut residual = f64::INFINITY;
    for _ in 0..max_sweeps {
        for x in 0..n1 {
            let row = &mut w[x * n2..(x + 1) * n2];
            let f = q1.weights()[x] / row.iter().sum::<f64>();
            row.iter_mut().for_each(|v| *v *= f);
        }
        for y in 0..n2 {
            let col: f64 = (0..n1).map(|x| w[x * n2 + y]).sum();
            let f = q2.weights()[y] / col;
            (0..n1).for_each(|x| w[x * n2 + y] *= f);
        }
        residual = (0..n1)
            .map(|x| (w[x * n2..(x + 1) * n2].iter().sum::<f64>() - q1.weights()[x]).abs())
            .fold(0.0, f64::max);
        if residual <= tol {
            let joint = Prob::from_masses(q.joint.space().clone(), w)?;
            return Ok(q.with_prob(joint));
        }
    }
    Err(Error::NoConvergence {
        sweeps: max_sweeps,
        residual,
    })
}

/// Margin tolerance the constrained flow restores after every step.
pub const IPF_TOLERANCE: f64 = 1e-13;
/// Sweep budget for each IPF repair.
pub const IPF_MAX_SWEEPS: usize = 100_000;

/// `-(interaction part of Grad S_ε)`, the descent field on transport plans.
pub struct ConstrainedSchrodingerField<'a> {
    pub problem: &'a SchrodingerProblem,
}

impl ConstrainedSchrodingerField<'_> {
    fn joint(&self, q: &Prob) -> Result<JointProb> {
        JointProb::from_prob(self.problem.margins.0.len(), self.problem.margins.1.len(), q.clone())
    }
}

impl VectorField for ConstrainedSchrodingerField<'_> {
    fn eval(&self, q: &Prob) -> Result<Fiber> {
        let j = self.joint(q)?;
        let g = schrodinger_grad(self.problem, &j)?;
        Ok(interaction_part(&j, &g)?.scale(-1.0))
    }

    fn objective(&self, q: &Prob) -> Result<Option<f64>> {
        schrodinger_objective(self.problem, &self.joint(q)?).map(Some)
    }
}

/// Descent on `Γ(q₁, q₂)` along the interaction part of `-Grad S_ε`.
///
/// Each step follows the field in the exponential chart and is then projected
/// back onto the plans with the prescribed margins by IPF.
pub fn constrained_schrodinger_flow(
    prob: &SchrodingerProblem,
    q0: &JointProb,
    opts: &IntegratorOptions,
) -> Result<Trajectory<JointProb>> {
    opts.validate()?;
    prob.check(q0)?;
    let (q1, q2) = prob.margins();
    let drift = marginal(q0, Axis::First)
        .sup_distance(q1)?
        .max(marginal(q0, Axis::Second).sup_distance(q2)?);
    if drift > 1e-10 {
        return Err(Error::InvalidArgument("initial plan does not have the problem margins"));
    }
    let field = ConstrainedSchrodingerField { problem: prob };
    let mut traj = Trajectory::new();
    let mut q = q0.clone();
    for k in 0..=opts.steps {
        let f = field.eval(q.prob())?;
        let diag = Diagnostics {
            objective: field.objective(q.prob())?,
            grad_norm: f.norm(),
        };
        let done = k == opts.steps || diag.grad_norm <= opts.stop_grad_norm;
        traj.push(k as f64 * opts.dt, q.clone(), diag);
        if done {
            break;
        }
        let next = positivity(k + 1, step(&field, q.prob(), &f, opts.dt, opts.scheme))?;
        q = ipf(&q.with_prob(next), q1, q2, IPF_TOLERANCE, IPF_MAX_SWEEPS)?;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn joint(n1: usize, n2: usize, w: &[f64]) -> JointProb {
        JointProb::from_weights(n1, n2, w.to_vec()).unwrap()
    }

    #[test]
    fn margins_of_two_by_two() {
        let r = joint(2, 2, &[0.1, 0.2, 0.3, 0.4]);
        let m1 = marginal(&r, Axis::First);
        let m2 = marginal(&r, Axis::Second);
        assert!((m1.weights()[0] - 0.3).abs() < 1e-15 && (m1.weights()[1] - 0.7).abs() < 1e-15);
        assert!((m2.weights()[0] - 0.4).abs() < 1e-15 && (m2.weights()[1] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn product_margins_are_recovered() {
        let q1 = Prob::from_weights(vec![0.2, 0.8]).unwrap();
        let q2 = Prob::from_weights(vec![0.1, 0.6, 0.3]).unwrap();
        let r = JointProb::product(&q1, &q2).unwrap();
        assert!(marginal(&r, Axis::First).sup_distance(&q1).unwrap() < 1e-15);
        assert!(marginal(&r, Axis::Second).sup_distance(&q2).unwrap() < 1e-15);
        assert!(mutual_information(&r).abs() < 1e-15);
    }

    #[test]
    fn condexp_of_measurable_variable() {
        let r = joint(2, 3, &[0.1, 0.05, 0.15, 0.3, 0.25, 0.15]);
        let f = Rv::new(r.space1().clone(), vec![2.0, -1.0]).unwrap();
        let lifted = r.lift(Axis::First, &f).unwrap();
        let back = condexp(&r, &lifted, Axis::First).unwrap();
        assert!((back.values()[0] - 2.0).abs() < 1e-15 && (back.values()[1] + 1.0).abs() < 1e-15);
        let c = Rv::constant(r.prob().space().clone(), 4.0);
        let cc = condexp(&r, &c, Axis::Second).unwrap();
        assert!(cc.values().iter().all(|v| (v - 4.0).abs() < 1e-15));
    }

    #[test]
    fn anova_of_main_effect() {
        let r = joint(2, 3, &[0.1, 0.05, 0.15, 0.3, 0.25, 0.15]);
        let r1 = marginal(&r, Axis::First);
        let f = center(&r1, &Rv::new(r.space1().clone(), vec![1.0, 3.0]).unwrap()).unwrap();
        let u = r.lift(Axis::First, &f).unwrap();
        let parts = anova(&r, &u).unwrap();
        assert!(parts.mean.abs() < 1e-15);
        for (a, b) in parts.effect1.values().iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(parts.effect2.values().iter().all(|v| v.abs() < 1e-12));
        assert!(parts.interaction.values().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn schrodinger_trivial_problem() {
        let q1 = Prob::from_weights(vec![0.3, 0.7]).unwrap();
        let q2 = Prob::from_weights(vec![0.5, 0.2, 0.3]).unwrap();
        let plan = JointProb::product(&q1, &q2).unwrap();
        let zero = Rv::constant(plan.prob().space().clone(), 0.0);
        let prob = SchrodingerProblem::new(zero, 1.0, q1, q2).unwrap();
        assert!(schrodinger_objective(&prob, &plan).unwrap().abs() < 1e-15);
        assert!(schrodinger_grad(&prob, &plan).unwrap().sup_norm() < 1e-15);
        assert!(SchrodingerProblem::new(prob.cost().clone(), 0.0, prob.margins.0.clone(), prob.margins.1.clone()).is_err());
    }

    #[test]
    fn ipf_restores_margins() {
        let q = joint(2, 2, &[0.1, 0.2, 0.3, 0.4]);
        let q1 = Prob::from_weights(vec![0.5, 0.5]).unwrap();
        let q2 = Prob::from_weights(vec![0.25, 0.75]).unwrap();
        let fitted = ipf(&q, &q1, &q2, 1e-14, 10_000).unwrap();
        assert!(marginal(&fitted, Axis::First).sup_distance(&q1).unwrap() < 1e-13);
        assert!(marginal(&fitted, Axis::Second).sup_distance(&q2).unwrap() < 1e-13);
    }

    #[test]
    fn constrained_flow_rejects_wrong_margins() {
        let q1 = Prob::from_weights(vec![0.5, 0.5]).unwrap();
        let q2 = Prob::from_weights(vec![0.25, 0.75]).unwrap();
        let q = joint(2, 2, &[0.1, 0.2, 0.3, 0.4]);
        let cost = Rv::constant(q.prob().space().clone(), 0.0);
        let prob = SchrodingerProblem::new(cost, 1.0, q1, q2).unwrap();
        let opts = IntegratorOptions::new(crate::flows::Scheme::ExpEuler, 0.1, 5);
        assert!(constrained_schrodinger_flow(&prob, &q, &opts).is_err());
    }
}
