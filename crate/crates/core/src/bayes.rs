//! Conditional representation of joints and the Bayes map.
//!
//! A joint `q` on `Ω₁ × Ω₂` is split as a margin on one factor and a kernel of
//! conditionals on the other. [`dB`] maps tangents of that split to velocities
//! of the joint and [`dB_transpose`] is its adjoint under the fiber pairings,
//! which turns gradients on joints into gradients on the split.

#![allow(non_snake_case)]

use alloc::vec::Vec;

use crate::chart::{exp_chart_inv, mix_chart};
use crate::error::{Error, Result};
use crate::product::{marginal, Axis, JointProb};
use crate::simplex::{dot, Fiber, Prob, RandomVariable};

/// A joint written as a margin times a kernel of conditionals.
#[derive(Debug, Clone)]
pub struct CondDecomp {
    axis: Axis,
    shape: JointProb,
    /// Margin on the conditioning factor.
    pub margin: Prob,
    /// `kernel[a]` is the conditional on the other factor given atom `a`.
    pub kernel: Vec<Prob>,
}

/// Tangent vector of a [`CondDecomp`]: one fiber vector per component.
#[derive(Debug, Clone)]
pub struct CondTangent {
    pub margin_dot: Fiber,
    pub kernel_dot: Vec<Fiber>,
}

impl CondDecomp {
    /// Assembles a decomposition from its parts; `axis` names the margin's factor.
    pub fn new(axis: Axis, margin: Prob, kernel: Vec<Prob>) -> Result<Self> {
        if kernel.len() != margin.len() {
            return Err(Error::LengthMismatch {
                expected: margin.len(),
                got: kernel.len(),
            });
        }
        let other = kernel[0].space().clone();
        for row in &kernel[1..] {
            other.check_same(row.space())?;
        }
        let (q1, q2) = match axis {
            Axis::First => (margin.clone(), kernel[0].clone()),
            Axis::Second => (kernel[0].clone(), margin.clone()),
        };
        let shape = JointProb::product(&q1, &q2)?;
        Ok(Self {
            axis,
            shape,
            margin,
            kernel,
        })
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    fn index(&self, a: usize, b: usize) -> usize {
        let n2 = self.shape.n2();
        match self.axis {
            Axis::First => a * n2 + b,
            Axis::Second => b * n2 + a,
        }
    }

    /// Tangent with every component zero.
    pub fn zero_tangent(&self) -> CondTangent {
        CondTangent {
            margin_dot: Fiber::zero(self.margin.clone()),
            kernel_dot: self.kernel.iter().map(|k| Fiber::zero(k.clone())).collect(),
        }
    }

    /// Covariance pairing on the decomposition: margin fiber plus every kernel fiber.
    pub fn pairing(&self, s: &CondTangent, t: &CondTangent) -> Result<f64> {
        self.check_tangent(s)?;
        let mut acc = s.margin_dot.inner(&t.margin_dot)?;
        for (a, b) in s.kernel_dot.iter().zip(&t.kernel_dot) {
            acc += a.inner(b)?;
        }
        Ok(acc)
    }

    fn check_tangent(&self, t: &CondTangent) -> Result<()> {
        t.margin_dot.check_base(&self.margin)?;
        if t.kernel_dot.len() != self.kernel.len() {
            return Err(Error::BaseMismatch);
        }
        for (f, k) in t.kernel_dot.iter().zip(&self.kernel) {
            f.check_base(k)?;
        }
        Ok(())
    }

    /// Moves every component along its exponential chart: `e_q(dt · v)`.
    pub fn exp_step(&self, t: &CondTangent, dt: f64) -> Result<CondDecomp> {
        self.check_tangent(t)?;
        let margin = exp_chart_inv(&self.margin, &t.margin_dot.scale(dt))?;
        let kernel = self
            .kernel
            .iter()
            .zip(&t.kernel_dot)
            .map(|(k, v)| exp_chart_inv(k, &v.scale(dt)))
            .collect::<Result<Vec<_>>>()?;
        Ok(CondDecomp {
            axis: self.axis,
            shape: self.shape.clone(),
            margin,
            kernel,
        })
    }
}

impl CondTangent {
    pub fn scale(&self, c: f64) -> CondTangent {
        CondTangent {
            margin_dot: self.margin_dot.scale(c),
            kernel_dot: self.kernel_dot.iter().map(|k| k.scale(c)).collect(),
        }
    }

    /// Largest absolute entry over all components.
    pub fn sup_norm(&self) -> f64 {
        self.kernel_dot
            .iter()
            .map(Fiber::sup_norm)
            .fold(self.margin_dot.sup_norm(), f64::max)
    }

    /// Sup-norm distance between tangents at the same decomposition.
    pub fn sup_distance(&self, other: &CondTangent) -> Result<f64> {
        let mut d = self.margin_dot.sup_distance(&other.margin_dot)?;
        for (a, b) in self.kernel_dot.iter().zip(&other.kernel_dot) {
            d = d.max(a.sup_distance(b)?);
        }
        Ok(d)
    }
}

/// Splits `q` into its margin on `axis` and the conditionals of the other factor.
pub fn decompose(q: &JointProb, axis: Axis) -> CondDecomp {
    let margin = marginal(q, axis);
    let other = q.factor_space(axis.other()).clone();
    let (na, nb) = (q.factor_space(axis).size(), other.size());
    let kernel = (0..na)
        .map(|a| {
            let masses = (0..nb)
                .map(|b| match axis {
                    Axis::First => q.at(a, b),
                    Axis::Second => q.at(b, a),
                })
                .collect();
            Prob::from_masses(other.clone(), masses).expect("rows of a positive joint")
        })
        .collect();
    CondDecomp {
        axis,
        shape: q.clone(),
        margin,
        kernel,
    }
}

/// The Bayes map `B(q_a, q_{b|a}) = q_{b|a} · q_a`.
pub fn compose(d: &CondDecomp) -> JointProb {
    let n = d.shape.n1() * d.shape.n2();
    let mut masses = alloc::vec![0.0; n];
    for (a, (m, row)) in d.margin.weights().iter().zip(&d.kernel).enumerate() {
        for (b, k) in row.weights().iter().enumerate() {
            masses[d.index(a, b)] = m * k;
        }
    }
    let joint = Prob::from_masses(d.shape.prob().space().clone(), masses)
        .expect("product of positive factors");
    JointProb::from_prob(d.shape.n1(), d.shape.n2(), joint).expect("shape")
}

/// Total derivative of the Bayes map: `(a, b) ↦ ṁ(a) + k̇_a(b)`.
pub fn dB(d: &CondDecomp, t: &CondTangent) -> Result<Fiber> {
    d.check_tangent(t)?;
    let n = d.shape.n1() * d.shape.n2();
    let mut values = alloc::vec![0.0; n];
    for (a, (m, row)) in t.margin_dot.values().iter().zip(&t.kernel_dot).enumerate() {
        for (b, k) in row.values().iter().enumerate() {
            values[d.index(a, b)] = m + k;
        }
    }
    Ok(Fiber::from_parts(compose(d).prob().clone(), values))
}

/// Adjoint of [`dB`]: `v ↦ (E_q[v | Π_a], q_a(a) (v(a, ·) - E_{q_{b|a}}[v(a, ·)]))`.
pub fn dB_transpose(d: &CondDecomp, v: &Fiber) -> Result<CondTangent> {
    let q = compose(d);
    v.check_base(q.prob())?;
    let vv = v.values();
    let mut cond = Vec::with_capacity(d.margin.len());
    let mut kernel_dot = Vec::with_capacity(d.kernel.len());
    for (a, row) in d.kernel.iter().enumerate() {
        let slice: Vec<f64> = (0..row.len()).map(|b| vv[d.index(a, b)]).collect();
        let mean = dot(row.weights(), &slice);
        cond.push(mean);
        let qa = d.margin.weights()[a];
        let values = slice.iter().map(|x| qa * (x - mean)).collect();
        kernel_dot.push(Fiber::from_parts(row.clone(), values));
    }
    Ok(CondTangent {
        margin_dot: Fiber::centering(d.margin.clone(), cond),
        kernel_dot,
    })
}

/// Natural gradient of `(q_a, q_{b|a}) ↦ KL(p‖B(q_a, q_{b|a}))`.
///
/// Margin slot `-η_{q_a}(p_a)`; kernel slot at `a` is `-p_a(a) η_{q_{b|a}}(p_{b|a})`.
pub fn gan_grad(p: &JointProb, d: &CondDecomp) -> Result<CondTangent> {
    p.same_shape(&d.shape)?;
    let target = decompose(p, d.axis);
    let margin_dot = mix_chart(&d.margin, &target.margin)?.scale(-1.0);
    let kernel_dot = d
        .kernel
        .iter()
        .zip(&target.kernel)
        .zip(target.margin.weights())
        .map(|((k, pk), pa)| Ok(mix_chart(k, pk)?.scale(-pa)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CondTangent {
        margin_dot,
        kernel_dot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::kl;
    use alloc::vec;

    fn joint(n1: usize, n2: usize, w: &[f64]) -> JointProb {
        JointProb::from_weights(n1, n2, w.to_vec()).unwrap()
    }

    #[test]
    fn decompose_two_by_two() {
        let q = joint(2, 2, &[0.1, 0.2, 0.3, 0.4]);
        let d = decompose(&q, Axis::First);
        assert!((d.margin.weights()[0] - 0.3).abs() < 1e-15);
        assert!((d.kernel[0].weights()[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((d.kernel[0].weights()[1] - 2.0 / 3.0).abs() < 1e-15);
        assert!((d.kernel[1].weights()[0] - 3.0 / 7.0).abs() < 1e-15);
        assert!((d.kernel[1].weights()[1] - 4.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn product_has_constant_kernel() {
        let q1 = Prob::from_weights(vec![0.3, 0.7]).unwrap();
        let q2 = Prob::from_weights(vec![0.2, 0.5, 0.3]).unwrap();
        let q = JointProb::product(&q1, &q2).unwrap();
        for axis in [Axis::First, Axis::Second] {
            let d = decompose(&q, axis);
            let want = if axis == Axis::First { &q2 } else { &q1 };
            for row in &d.kernel {
                assert!(row.sup_distance(want).unwrap() < 1e-15);
            }
        }
    }

    #[test]
    fn roundtrip_both_axes() {
        let q = joint(2, 3, &[0.1, 0.05, 0.15, 0.3, 0.25, 0.15]);
        for axis in [Axis::First, Axis::Second] {
            let back = compose(&decompose(&q, axis));
            assert!(back.prob().sup_distance(q.prob()).unwrap() < 1e-15);
        }
    }

    #[test]
    fn zero_tangent_maps_to_zero() {
        let q = joint(2, 3, &[0.1, 0.05, 0.15, 0.3, 0.25, 0.15]);
        let d = decompose(&q, Axis::First);
        assert_eq!(dB(&d, &d.zero_tangent()).unwrap().sup_norm(), 0.0);
        let back = dB_transpose(&d, &Fiber::zero(q.prob().clone())).unwrap();
        assert_eq!(back.sup_norm(), 0.0);
    }

    #[test]
    fn gan_gradient_vanishes_at_target() {
        let q = joint(2, 3, &[0.1, 0.05, 0.15, 0.3, 0.25, 0.15]);
        let d = decompose(&q, Axis::Second);
        assert!(gan_grad(&q, &d).unwrap().sup_norm() < 1e-15);
    }

    #[test]
    fn gan_step_descends() {
        let p = joint(2, 3, &[0.1, 0.05, 0.15, 0.3, 0.25, 0.15]);
        let q = joint(2, 3, &[0.2, 0.2, 0.1, 0.1, 0.1, 0.3]);
        let d = decompose(&q, Axis::First);
        let g = gan_grad(&p, &d).unwrap();
        let next = d.exp_step(&g.scale(-1.0), 1e-3).unwrap();
        let before = kl(p.prob(), q.prob()).unwrap();
        let after = kl(p.prob(), compose(&next).prob()).unwrap();
        assert!(after < before);
    }
}
