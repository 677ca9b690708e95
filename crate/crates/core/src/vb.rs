//! Variational approximation of a posterior by an exponential tilt of the prior.
//!
//! For an observation `x` on the first factor of a joint `q₁₂`, the lower bound
//! `L(r, x) = -KL(r‖q₂) + E_r[log q_{1|2}(x|·)]` is maximised over the model
//! `r_θ = e^{θ·u - ψ(θ)} q₂`. In the parameter the ascent flow reads
//! `θ̇ = -Hess ψ(θ) θ + Cov_{r_θ}(u, log q_{1|2}(x|·))`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::cumulant::cumulant;
use crate::divergence::kl;
use crate::error::{Error, Result};
use crate::flows::{Diagnostics, Trajectory};
use crate::linalg::{condition_number, solve_spd, MAX_CONDITION};
use crate::product::{marginal, Axis, JointProb};
use crate::simplex::{center, cov, expect, Fiber, Prob, RandomVariable, Rv};

/// `‖θ‖` above which [`vb_flow`] reports divergence.
pub const DIVERGENCE_NORM: f64 = 1e6;

/// Exponential family `r_θ = e^{θ·u - ψ(θ)} q₂` with `q₂`-centered statistics.
#[derive(Debug, Clone)]
pub struct ExpModel {
    base: Prob,
    suffstats: Vec<Rv>,
    theta: Vec<f64>,
}

impl ExpModel {
    /// Statistics are re-centered under `base`; their Gram matrix must be nonsingular.
    pub fn new(base: Prob, suffstats: Vec<Rv>, theta: Vec<f64>) -> Result<Self> {
        if suffstats.is_empty() {
            return Err(Error::InvalidArgument("at least one sufficient statistic is required"));
        }
        if theta.len() != suffstats.len() {
            return Err(Error::LengthMismatch {
                expected: suffstats.len(),
                got: theta.len(),
            });
        }
        let centered = suffstats
            .iter()
            .map(|u| center(&base, u).map(|f| f.to_rv()))
            .collect::<Result<Vec<_>>>()?;
        let gram = gram_matrix(&base, &centered)?;
        let condition = condition_number(&gram, centered.len());
        if !(condition <= MAX_CONDITION) {
            return Err(Error::IllConditioned { condition });
        }
        Ok(Self {
            base,
            suffstats: centered,
            theta,
        })
    }

    /// Full-rank model whose statistics are orthonormal in `L²(base)`.
    ///
    /// Gram–Schmidt on the centered indicators of the first `dim` atoms.
    pub fn orthonormal(base: Prob, dim: usize) -> Result<Self> {
        if dim == 0 || dim >= base.len() {
            return Err(Error::InvalidArgument("dimension must lie in 1..n-1"));
        }
        let mut basis: Vec<Fiber> = Vec::with_capacity(dim);
        for k in 0..dim {
            let e = Rv::indicator(base.space().clone(), k)?;
            let mut v = center(&base, &e)?;
            for b in &basis {
                v = v.sub(&b.scale(v.inner(b)?))?;
            }
            let norm = v.norm();
            basis.push(v.scale(1.0 / norm));
        }
        let stats = basis.iter().map(Fiber::to_rv).collect();
        Self::new(base, stats, vec![0.0; dim])
    }

    pub fn base(&self) -> &Prob {
        &self.base
    }

    pub fn suffstats(&self) -> &[Rv] {
        &self.suffstats
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.suffstats.len()
    }

    pub fn with_theta(&self, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: theta.len(),
            });
        }
        Ok(Self {
            base: self.base.clone(),
            suffstats: self.suffstats.clone(),
            theta,
        })
    }

    fn tilt_rv(&self) -> Rv {
        let n = self.base.len();
        let mut values = vec![0.0; n];
        for (t, u) in self.theta.iter().zip(&self.suffstats) {
            for (v, x) in values.iter_mut().zip(u.values()) {
                *v += t * x;
            }
        }
        Rv::from_parts(self.base.space().clone(), values)
    }
}

fn gram_matrix(p: &Prob, stats: &[Rv]) -> Result<Vec<f64>> {
    let d = stats.len();
    let mut g = vec![0.0; d * d];
    for i in 0..d {
        for j in i..d {
            let c = cov(p, &stats[i], &stats[j])?;
            g[i * d + j] = c;
            g[j * d + i] = c;
        }
    }
    Ok(g)
}

/// The model distribution `r_θ`.
pub fn model_prob(m: &ExpModel) -> Result<Prob> {
    m.base.tilt(&m.tilt_rv())
}

/// `ψ(θ) = log E_{q₂}[e^{θ·u}]`.
pub fn psi(m: &ExpModel) -> Result<f64> {
    cumulant(&m.base, &m.tilt_rv())
}

/// `∇ψ(θ) = E_{r_θ}[u]`.
pub fn grad_psi(m: &ExpModel) -> Result<Vec<f64>> {
    let r = model_prob(m)?;
    m.suffstats.iter().map(|u| expect(&r, u)).collect()
}

/// `Hess ψ(θ)_{ij} = Cov_{r_θ}(u_i, u_j)`, row-major `d × d`.
pub fn hess_psi(m: &ExpModel) -> Result<Vec<f64>> {
    gram_matrix(&model_prob(m)?, &m.suffstats)
}

/// Posterior approximation problem for observation `x` on the first factor.
#[derive(Debug, Clone)]
pub struct VBProblem {
    joint: JointProb,
    x: usize,
    prior: Prob,
    log_likelihood: Rv,
}

impl VBProblem {
    pub fn new(joint: JointProb, x: usize) -> Result<Self> {
        if x >= joint.n1() {
            return Err(Error::InvalidArgument("observation index out of range"));
        }
        let prior = marginal(&joint, Axis::Second);
        // log q_{1|2}(x|y) = log q(x, y) - log q₂(y)
        let values = (0..joint.n2())
            .map(|y| (joint.at(x, y) / prior.weights()[y]).ln())
            .collect();
        let log_likelihood = Rv::new(prior.space().clone(), values)?;
        Ok(Self {
            joint,
            x,
            prior,
            log_likelihood,
        })
    }

    pub fn joint(&self) -> &JointProb {
        &self.joint
    }

    pub fn observation(&self) -> usize {
        self.x
    }

    /// The margin `q₂` on the latent factor.
    pub fn prior(&self) -> &Prob {
        &self.prior
    }

    /// `y ↦ log q_{1|2}(x|y)`.
    pub fn log_likelihood(&self) -> &Rv {
        &self.log_likelihood
    }

    /// `log q₁(x)`.
    pub fn log_evidence(&self) -> f64 {
        let row: f64 = (0..self.joint.n2()).map(|y| self.joint.at(self.x, y)).sum();
        row.ln()
    }

    /// The exact posterior `q_{2|1}(·|x)`.
    pub fn posterior(&self) -> Prob {
        let masses = (0..self.joint.n2()).map(|y| self.joint.at(self.x, y)).collect();
        Prob::from_masses(self.prior.space().clone(), masses).expect("positive joint")
    }
}

/// Evidence lower bound `L(r, x) = -KL(r‖q₂) + E_r[log q_{1|2}(x|·)]`.
pub fn elbo(p: &VBProblem, r: &Prob) -> Result<f64> {
    Ok(-kl(r, &p.prior)? + expect(r, &p.log_likelihood)?)
}

/// Natural gradient of `r ↦ L(r, x)`: the `r`-centered `log(q₁₂(x, ·)/r)`.
pub fn elbo_natural_grad(p: &VBProblem, r: &Prob) -> Result<Fiber> {
    p.prior.space().check_same(r.space())?;
    let values = (0..p.joint.n2())
        .map(|y| (p.joint.at(p.x, y) / r.weights()[y]).ln())
        .collect();
    center(r, &Rv::new(r.space().clone(), values)?)
}

/// Right-hand side of the parameter flow: `-Hess ψ(θ) θ + Cov_{r_θ}(u, log q_{1|2}(x|·))`.
///
/// This is the Euclidean gradient of `θ ↦ L(r_θ, x)`.
pub fn vb_theta_rhs(p: &VBProblem, m: &ExpModel) -> Result<Vec<f64>> {
    p.prior.space().check_same(m.base.space())?;
    let r = model_prob(m)?;
    let d = m.dim();
    let h = gram_matrix(&r, &m.suffstats)?;
    (0..d)
        .map(|i| {
            let ht: f64 = (0..d).map(|j| h[i * d + j] * m.theta[j]).sum();
            Ok(cov(&r, &m.suffstats[i], &p.log_likelihood)? - ht)
        })
        .collect()
}

/// The parameter whose chart coordinates best match the exact posterior.
///
/// Solves the `L²(q₂)` normal equations for `s_{q₂}(q_{2|1}(·|x)) ≈ θ̄·u`;
/// exact when the posterior lies in the model.
pub fn posterior_theta(p: &VBProblem, m: &ExpModel) -> Result<Vec<f64>> {
    let target = crate::chart::exp_chart(m.base(), &p.posterior())?;
    let d = m.dim();
    let g = gram_matrix(m.base(), &m.suffstats)?;
    let rhs = m
        .suffstats
        .iter()
        .map(|u| cov(m.base(), u, &target))
        .collect::<Result<Vec<_>>>()?;
    solve_spd(&g, d, &rhs)
}

/// Classical RK4 in `θ` on [`vb_theta_rhs`], recording `L(r_θ, x)` at each state.
pub fn vb_flow(p: &VBProblem, m0: &ExpModel, dt: f64, steps: usize) -> Result<Trajectory<Vec<f64>>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument("dt must be positive"));
    }
    if steps < 1 {
        return Err(Error::InvalidArgument("steps must be at least 1"));
    }
    let rhs = |theta: &[f64]| vb_theta_rhs(p, &m0.with_theta(theta.to_vec())?);
    let axpy = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + s * y).collect()
    };
    let mut traj = Trajectory::new();
    let mut theta = m0.theta.clone();
    for k in 0..=steps {
        let norm = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
        if !(norm <= DIVERGENCE_NORM) {
            return Err(Error::Diverged { step: k, norm });
        }
        let model = m0.with_theta(theta.clone())?;
        let k1 = rhs(&theta)?;
        let diag = Diagnostics {
            objective: Some(elbo(p, &model_prob(&model)?)?),
            grad_norm: k1.iter().map(|g| g * g).sum::<f64>().sqrt(),
        };
        traj.push(k as f64 * dt, theta.clone(), diag);
        if k == steps {
            break;
        }
        let k2 = rhs(&axpy(&theta, 0.5 * dt, &k1))?;
        let k3 = rhs(&axpy(&theta, 0.5 * dt, &k2))?;
        let k4 = rhs(&axpy(&theta, dt, &k3))?;
        theta = theta
            .iter()
            .enumerate()
            .map(|(i, t)| t + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem() -> VBProblem {
        let joint = JointProb::from_weights(
            2,
            3,
            vec![0.10, 0.15, 0.05, 0.20, 0.30, 0.20],
        )
        .unwrap();
        VBProblem::new(joint, 0).unwrap()
    }

    #[test]
    fn zero_parameter_is_base() {
        let p = problem();
        let m = ExpModel::orthonormal(p.prior().clone(), 2).unwrap();
        assert!(model_prob(&m).unwrap().sup_distance(p.prior()).unwrap() < 1e-15);
        assert!(psi(&m).unwrap().abs() < 1e-15);
    }

    #[test]
    fn orthonormal_statistics() {
        let p = problem();
        let m = ExpModel::orthonormal(p.prior().clone(), 2).unwrap();
        let g = gram_matrix(p.prior(), m.suffstats()).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-12 && (g[3] - 1.0).abs() < 1e-12 && g[1].abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_statistics_are_rejected() {
        let p = problem();
        let u = Rv::new(p.prior().space().clone(), vec![1.0, 0.0, -1.0]).unwrap();
        let err = ExpModel::new(p.prior().clone(), vec![u.clone(), u.map(|v| 2.0 * v)], vec![0.0; 2]);
        assert!(matches!(err, Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn bound_is_exact_at_posterior() {
        let p = problem();
        let post = p.posterior();
        assert!((elbo(&p, &post).unwrap() - p.log_evidence()).abs() < 1e-15);
        assert!(elbo_natural_grad(&p, &post).unwrap().sup_norm() < 1e-14);
        assert!(elbo(&p, p.prior()).unwrap() <= p.log_evidence());
    }

    #[test]
    fn observation_out_of_range() {
        let joint = JointProb::from_weights(2, 2, vec![0.25; 4]).unwrap();
        assert!(VBProblem::new(joint, 2).is_err());
    }
}
