//! Analytic natural gradients against the finite-difference oracle.

use infogeo_core::gradients::{
    fd_natural_grad, grad_cross_entropy_total, grad_entropy, grad_expect, grad_js, grad_kl_total,
    grad_phi_mixture_center, DEFAULT_FD_STEP,
};
use infogeo_core::product::{
    grad_kl_meanfield_fwd, grad_kl_meanfield_rev, mean_field, mutual_information, schrodinger_grad,
    schrodinger_objective, SchrodingerProblem,
};
use infogeo_core::vb::{elbo, elbo_natural_grad, VBProblem};
use infogeo_core::{cross_entropy, entropy, expect, js, kl, Fiber, JointProb, Prob, Result, SampleSpace};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::GradName;
use crate::instances;

/// Acceptance bound on `‖analytic − fd‖∞ / (1 + ‖analytic‖∞)`.
pub const TOLERANCE: f64 = 1e-5;

/// Instance size: `n` atoms, or `n1 × n2` for gradients on product spaces.
#[derive(Debug, Clone, Copy)]
pub enum Dims {
    Simplex(usize),
    Product(usize, usize),
}

#[derive(Debug, Clone)]
pub struct TrialResult {
    /// Value of the functional at the instance.
    pub objective: f64,
    /// Fiber norm of the analytic gradient (root of the summed squares for pairs).
    pub grad_norm: f64,
    /// Worst relative sup-norm error over the checked slots.
    pub rel_error: f64,
    /// Weights of the point the first checked gradient is based at.
    pub base: Vec<f64>,
}

fn rel_error(analytic: &Fiber, phi: impl Fn(&Prob) -> Result<f64>) -> Result<f64> {
    let fd = fd_natural_grad(phi, analytic.base(), DEFAULT_FD_STEP)?;
    Ok(analytic.sup_distance(&fd)? / (1.0 + analytic.sup_norm()))
}

fn dims(d: Dims) -> (usize, usize) {
    match d {
        Dims::Simplex(n) => (n, n),
        Dims::Product(n1, n2) => (n1, n2),
    }
}

/// One randomized comparison of `which`, drawing its instance from `rng`.
pub fn trial(which: GradName, d: Dims, rng: &mut ChaCha8Rng) -> Result<TrialResult> {
    let (n, _) = dims(d);
    let result = |objective: f64, grads: &[&Fiber], errs: &[f64]| TrialResult {
        objective,
        grad_norm: grads.iter().map(|g| g.norm().powi(2)).sum::<f64>().sqrt(),
        rel_error: errs.iter().copied().fold(0.0, f64::max),
        base: grads[0].base().weights().to_vec(),
    };
    match which {
        GradName::Expect => {
            let q = instances::prob(rng, n);
            let u = instances::rv(rng, q.space());
            let g = grad_expect(&q, &u)?;
            let e = rel_error(&g, |x| expect(x, &u))?;
            Ok(result(expect(&q, &u)?, &[&g], &[e]))
        }
        GradName::KlTotal | GradName::CrossEntropyTotal => {
            let q = instances::prob(rng, n);
            let r = instances::prob(rng, n);
            let f = if which == GradName::KlTotal { kl } else { cross_entropy };
            let g = if which == GradName::KlTotal {
                grad_kl_total(&q, &r)?
            } else {
                grad_cross_entropy_total(&q, &r)?
            };
            let e1 = rel_error(&g.first, |x| f(x, &r))?;
            let e2 = rel_error(&g.second, |x| f(&q, x))?;
            Ok(result(f(&q, &r)?, &[&g.first, &g.second], &[e1, e2]))
        }
        GradName::Entropy => {
            let q = instances::prob(rng, n);
            let g = grad_entropy(&q);
            let e = rel_error(&g, |x| Ok(entropy(x)))?;
            Ok(result(entropy(&q), &[&g], &[e]))
        }
        GradName::Js => {
            let q = instances::prob(rng, n);
            let r = instances::prob(rng, n);
            let g = grad_js(&q, &r)?;
            let e = rel_error(&g, |x| js(x, &r))?;
            Ok(result(js(&q, &r)?, &[&g], &[e]))
        }
        GradName::PhiMixtureCenter => {
            let p = instances::prob(rng, n);
            let q = instances::prob(rng, n);
            let r = instances::prob(rng, n);
            let phi = |x: &Prob| Ok(0.5 * (kl(&q, x)? + kl(&r, x)?));
            let g = grad_phi_mixture_center(&p, &q, &r)?;
            let e = rel_error(&g, phi)?;
            Ok(result(phi(&p)?, &[&g], &[e]))
        }
        GradName::MeanfieldFwd | GradName::MeanfieldRev => {
            let (n1, n2) = dims(d);
            let r = instances::joint(rng, n1, n2);
            let as_joint = |x: &Prob| JointProb::from_prob(n1, n2, x.clone());
            let (g, phi): (Fiber, Box<dyn Fn(&Prob) -> Result<f64>>) = if which == GradName::MeanfieldFwd {
                (
                    grad_kl_meanfield_fwd(&r)?,
                    Box::new(move |x| {
                        let j = as_joint(x)?;
                        kl(mean_field(&j).prob(), j.prob())
                    }),
                )
            } else {
                (grad_kl_meanfield_rev(&r)?, Box::new(move |x| Ok(mutual_information(&as_joint(x)?))))
            };
            let e = rel_error(&g, &phi)?;
            Ok(result(phi(r.prob())?, &[&g], &[e]))
        }
        GradName::Schrodinger => {
            let (n1, n2) = dims(d);
            let q1 = instances::prob(rng, n1);
            let q2 = instances::prob(rng, n2);
            let cost = instances::rv(rng, &SampleSpace::new(n1 * n2)?);
            let eps = 0.5 + 1.5 * rng.random::<f64>();
            let problem = SchrodingerProblem::new(cost, eps, q1, q2)?;
            let q = instances::joint(rng, n1, n2);
            let phi = |x: &Prob| schrodinger_objective(&problem, &JointProb::from_prob(n1, n2, x.clone())?);
            let g = schrodinger_grad(&problem, &q)?;
            let e = rel_error(&g, phi)?;
            Ok(result(phi(q.prob())?, &[&g], &[e]))
        }
        GradName::Elbo => {
            let (n1, n2) = dims(d);
            let joint = instances::joint(rng, n1, n2);
            let x = instances::size(rng, 0, n1 - 1);
            let problem = VBProblem::new(joint, x)?;
            let r = instances::prob(rng, n2);
            let g = elbo_natural_grad(&problem, &r)?;
            let e = rel_error(&g, |s| elbo(&problem, s))?;
            Ok(result(elbo(&problem, &r)?, &[&g], &[e]))
        }
    }
}

/// Runs `trials` independent trials, trial `k` on stream `k + 1` of `seed`.
///
/// Trials run in parallel; the results come back in trial order.
pub fn run_trials(which: GradName, d: Dims, seed: u64, trials: usize) -> Result<Vec<TrialResult>> {
    (0..trials)
        .into_par_iter()
        .map(|k| trial(which, d, &mut instances::stream(seed, k as u64 + 1)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_gradient_passes_a_few_trials() {
        let all = [
            GradName::Expect,
            GradName::KlTotal,
            GradName::CrossEntropyTotal,
            GradName::Entropy,
            GradName::Js,
            GradName::PhiMixtureCenter,
            GradName::MeanfieldFwd,
            GradName::MeanfieldRev,
            GradName::Schrodinger,
            GradName::Elbo,
        ];
        for which in all {
            let d = if which.on_product() { Dims::Product(3, 2) } else { Dims::Simplex(4) };
            for r in run_trials(which, d, 11, 3).unwrap() {
                assert!(r.rel_error <= TOLERANCE, "{which:?}: {}", r.rel_error);
            }
        }
    }

    #[test]
    fn results_do_not_depend_on_scheduling() {
        let a = run_trials(GradName::Js, Dims::Simplex(5), 3, 8).unwrap();
        let b: Vec<_> = (0..8)
            .map(|k| trial(GradName::Js, Dims::Simplex(5), &mut instances::stream(3, k + 1)).unwrap())
            .collect();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.rel_error.to_bits(), y.rel_error.to_bits());
            assert_eq!(x.base, y.base);
        }
    }
}
