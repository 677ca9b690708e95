//! Dually affine information geometry on finite probability simplices.
//!
//! Points of the open simplex ([`Prob`]) carry two affine charts, exponential
//! and mixture, with their parallel transports; fibers ([`Fiber`]) carry the
//! covariance inner product under which natural gradients are computed.
//! On top of that calculus the crate provides:
//!
//! - natural gradients of KL, cross entropy, entropy and Jensen–Shannon
//!   ([`gradients`]), with a finite-difference oracle;
//! - gradient flows integrated in the moving exponential chart and the two
//!   closed-form KL flows ([`flows`]);
//! - product spaces: margins, mean field, ANOVA, Kantorovich and
//!   Schrödinger gradients and the constrained Schrödinger flow ([`product`]);
//! - the Bayes map with its derivative and adjoint, and GAN-style gradients
//!   ([`bayes`]);
//! - ELBO gradients and the parameter flow for exponential-family variational
//!   approximations ([`vb`]);
//! - brute-force references for cross-checking ([`oracles`]).
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bayes;
pub mod chart;
pub mod cumulant;
pub mod divergence;
pub mod error;
pub mod flows;
pub mod gradients;
pub mod linalg;
pub mod oracles;
pub mod product;
pub mod simplex;
pub mod vb;

pub use chart::{e_transport, exp_chart, exp_chart_inv, m_transport, mix_chart, mix_chart_inv};
pub use cumulant::{cumulant, cumulant_d1, cumulant_d2};
pub use divergence::{cross_entropy, entropy, js, kl};
pub use error::{Error, Result};
pub use flows::{integrate, IntegratorOptions, Scheme, Trajectory, VectorField};
pub use gradients::{fd_natural_grad, GradPair};
pub use product::{Axis, JointProb};
pub use simplex::{center, cov, expect, Fiber, Prob, RandomVariable, Rv, SampleSpace};
