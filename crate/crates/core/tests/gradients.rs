mod common;

use infogeo_core::divergence::midpoint;
use infogeo_core::gradients::*;
use infogeo_core::product::*;
use infogeo_core::vb::{elbo, elbo_natural_grad, VBProblem};
use infogeo_core::*;

const INSTANCES: usize = 50;
const STEP: f64 = DEFAULT_FD_STEP;

fn assert_matches_fd<F>(analytic: &Fiber, phi: F, label: &str)
where
    F: Fn(&Prob) -> Result<f64>,
{
    let fd = fd_natural_grad(phi, analytic.base(), STEP).unwrap();
    let err = common::rel_sup(analytic.values(), fd.values());
    assert!(err <= 1e-5, "{label}: relative error {err:e}");
    assert!(expect(analytic.base(), analytic).unwrap().abs() <= 1e-10 * (1.0 + analytic.sup_norm()));
}

/// Runs `check` on `INSTANCES` pairs of random points with `n ≤ 8`.
fn pairs(seed: u64, mut check: impl FnMut(&Prob, &Prob)) {
    let mut rng = common::rng(seed);
    for _ in 0..INSTANCES {
        let n = common::size(&mut rng, 2, 8);
        let q = common::prob(&mut rng, n);
        let r = common::prob(&mut rng, n);
        check(&q, &r);
    }
}

#[test]
fn expectation_gradient() {
    let mut rng = common::rng(10);
    for _ in 0..INSTANCES {
        let n = common::size(&mut rng, 2, 8);
        let q = common::prob(&mut rng, n);
        let u = common::rv(&mut rng, q.space());
        assert_matches_fd(&grad_expect(&q, &u).unwrap(), |x| expect(x, &u), "grad_expect");
    }
}

#[test]
fn kl_gradient_both_slots() {
    pairs(11, |q, r| {
        let g = grad_kl_total(q, r).unwrap();
        assert_matches_fd(&g.first, |x| kl(x, r), "kl first");
        assert_matches_fd(&g.second, |x| kl(q, x), "kl second");
    });
}

#[test]
fn cross_entropy_gradient_both_slots() {
    pairs(12, |q, r| {
        let g = grad_cross_entropy_total(q, r).unwrap();
        assert_matches_fd(&g.first, |x| cross_entropy(x, r), "cross entropy first");
        assert_matches_fd(&g.second, |x| cross_entropy(q, x), "cross entropy second");
    });
}

#[test]
fn entropy_gradient() {
    pairs(13, |q, _| {
        assert_matches_fd(&grad_entropy(q), |x| Ok(entropy(x)), "entropy");
    });
}

#[test]
fn js_gradient() {
    pairs(14, |q, r| {
        assert_matches_fd(&grad_js(q, r).unwrap(), |x| js(x, r), "js");
    });
}

#[test]
fn js_gradient_through_entropies() {
    // JS(q, r) = H(m) - ½H(q) - ½H(r) with m = ½(q + r); the velocity of m is
    // ½(q/m) q̇, so Grad_q H(m) = ½ ᵉU_m^q Grad H(m).
    pairs(15, |q, r| {
        let m = midpoint(q, r).unwrap();
        let via = e_transport(&m, q, &gradients::grad_entropy(&m))
            .unwrap()
            .scale(0.5)
            .sub(&grad_entropy(q).scale(0.5))
            .unwrap();
        assert!(via.sup_distance(&grad_js(q, r).unwrap()).unwrap() <= 1e-12);
    });
}

#[test]
fn mixture_center_gradient() {
    let mut rng = common::rng(16);
    for _ in 0..INSTANCES {
        let n = common::size(&mut rng, 2, 8);
        let (a, q, r) = (common::prob(&mut rng, n), common::prob(&mut rng, n), common::prob(&mut rng, n));
        let g = grad_phi_mixture_center(&a, &q, &r).unwrap();
        assert_matches_fd(&g, |x| Ok(0.5 * (kl(&q, x)? + kl(&r, x)?)), "mixture center");
    }
}

fn joints(seed: u64, mut check: impl FnMut(&JointProb)) {
    let mut rng = common::rng(seed);
    for _ in 0..INSTANCES {
        let n1 = common::size(&mut rng, 2, 4);
        let n2 = common::size(&mut rng, 2, 4);
        check(&common::joint(&mut rng, n1, n2));
    }
}

#[test]
fn mean_field_gradients() {
    joints(17, |r| {
        let (n1, n2) = (r.n1(), r.n2());
        let as_joint = |x: &Prob| JointProb::from_prob(n1, n2, x.clone());
        assert_matches_fd(
            &grad_kl_meanfield_fwd(r).unwrap(),
            |x| {
                let j = as_joint(x)?;
                kl(mean_field(&j).prob(), j.prob())
            },
            "mean field forward",
        );
        assert_matches_fd(
            &grad_kl_meanfield_rev(r).unwrap(),
            |x| Ok(mutual_information(&as_joint(x)?)),
            "mean field reverse",
        );
    });
}

#[test]
fn schrodinger_gradient() {
    let mut rng = common::rng(18);
    for (i, eps) in [0.5, 1.0, 2.0].iter().cycle().take(INSTANCES).enumerate() {
        let n1 = 2 + i % 3;
        let n2 = 2 + (i / 3) % 3;
        let q1 = common::prob(&mut rng, n1);
        let q2 = common::prob(&mut rng, n2);
        let cost = common::rv(&mut rng, &SampleSpace::new(n1 * n2).unwrap());
        let prob = SchrodingerProblem::new(cost, *eps, q1, q2).unwrap();
        let q = common::joint(&mut rng, n1, n2);
        assert_matches_fd(
            &schrodinger_grad(&prob, &q).unwrap(),
            |x| schrodinger_objective(&prob, &JointProb::from_prob(n1, n2, x.clone())?),
            "schrodinger",
        );
    }
}

#[test]
fn elbo_gradient() {
    let mut rng = common::rng(19);
    for _ in 0..INSTANCES {
        let n1 = common::size(&mut rng, 2, 4);
        let n2 = common::size(&mut rng, 2, 6);
        let joint = common::joint(&mut rng, n1, n2);
        let x = common::size(&mut rng, 0, n1 - 1);
        let problem = VBProblem::new(joint, x).unwrap();
        let r = common::prob(&mut rng, n2);
        assert_matches_fd(&elbo_natural_grad(&problem, &r).unwrap(), |s| elbo(&problem, s), "elbo");
    }
}

#[test]
fn kl_chain_rule_along_curves() {
    // d/dt KL(e_q(tv) ‖ e_r(tw)) at t = 0 is <Grad₁, v>_q + <Grad₂, w>_r.
    let mut rng = common::rng(20);
    let h = 1e-5;
    for _ in 0..10 {
        let n = common::size(&mut rng, 2, 8);
        let (q, r) = (common::prob(&mut rng, n), common::prob(&mut rng, n));
        let v = common::fiber(&mut rng, &q);
        let w = common::fiber(&mut rng, &r);
        let at = |t: f64| {
            kl(
                &exp_chart_inv(&q, &v.scale(t)).unwrap(),
                &exp_chart_inv(&r, &w.scale(t)).unwrap(),
            )
            .unwrap()
        };
        let fd = (at(h) - at(-h)) / (2.0 * h);
        let g = grad_kl_total(&q, &r).unwrap();
        let pairing = g.first.inner(&v).unwrap() + g.second.inner(&w).unwrap();
        assert!((fd - pairing).abs() <= 1e-6, "{fd} vs {pairing}");
    }
}

#[test]
fn stationary_points() {
    let mut rng = common::rng(21);
    for _ in 0..10 {
        let n = common::size(&mut rng, 2, 8);
        let (q, r) = (common::prob(&mut rng, n), common::prob(&mut rng, n));
        assert!(grad_js(&q, &q).unwrap().sup_norm() <= 1e-15);
        let m = midpoint(&q, &r).unwrap();
        assert!(grad_phi_mixture_center(&m, &q, &r).unwrap().sup_norm() <= 1e-14);
        let g = grad_kl_total(&q, &q).unwrap();
        assert!(g.first.sup_norm() <= 1e-15 && g.second.sup_norm() <= 1e-15);
    }
}
