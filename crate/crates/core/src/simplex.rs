//! Points of the open probability simplex, random variables, and fiber vectors.
//!
//! A [`Prob`] is a strictly positive probability function on a finite sample
//! space. A [`Fiber`] is a random variable paired with a base point `q` and
//! centered under it; the fibers carry the covariance inner product
//! `<v, w>_q = E_q[v w]`.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

/// Smallest weight accepted when constructing a [`Prob`].
pub const MIN_WEIGHT: f64 = 1e-300;
/// Distance from 1 within which input weights are silently renormalized.
pub const NORMALIZATION_SLACK: f64 = 1e-9;
/// Element-wise tolerance used to decide that two base points coincide.
pub const BASE_TOLERANCE: f64 = 1e-15;
/// Relative tolerance of the centering check, scaled by `1 + max|v|`.
pub const CENTERING_TOLERANCE: f64 = 1e-10;

/// A finite sample space with `size >= 2` atoms and optional unique labels.
#[derive(Debug, Clone)]
pub struct SampleSpace {
    size: usize,
    labels: Option<Arc<[String]>>,
}

impl SampleSpace {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::InvalidSpace("a sample space needs at least two atoms"));
        }
        Ok(Self { size, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        let size = labels.len();
        if size < 2 {
            return Err(Error::InvalidSpace("a sample space needs at least two atoms"));
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[i + 1..].iter().any(|b| a == b) {
                return Err(Error::InvalidSpace("labels must be unique"));
            }
        }
        Ok(Self {
            size,
            labels: Some(labels.into()),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub(crate) fn check_same(&self, other: &SampleSpace) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch {
                left: self.size,
                right: other.size,
            })
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == self.size {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected: self.size,
                got: len,
            })
        }
    }
}

impl PartialEq for SampleSpace {
    fn eq(&self, other: &Self) -> bool {
        if self.size != other.size {
            return false;
        }
        match (&self.labels, &other.labels) {
            (None, None) => true,
            (Some(a), Some(b)) => Arc::ptr_eq(a, b) || a == b,
            _ => false,
        }
    }
}

/// Anything carrying one real value per atom of a sample space.
pub trait RandomVariable {
    fn space(&self) -> &SampleSpace;
    fn values(&self) -> &[f64];
}

/// A strictly positive probability function.
#[derive(Debug, Clone)]
pub struct Prob {
    space: SampleSpace,
    weights: Arc<[f64]>,
}

impl Prob {
    /// Validates `weights` as a point of the open simplex.
    ///
    /// Weights below [`MIN_WEIGHT`] are rejected. A total mass within
    /// [`NORMALIZATION_SLACK`] of one is renormalized, anything further off
    /// is an error.
    pub fn new(space: SampleSpace, weights: Vec<f64>) -> Result<Self> {
        space.check_len(weights.len())?;
        check_positive(&weights)?;
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_SLACK {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self::normalized_unchecked(space, weights, sum))
    }

    /// Builds a probability on an unlabeled space of `weights.len()` atoms.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let space = SampleSpace::new(weights.len())?;
        Self::new(space, weights)
    }

    /// Divides positive masses by their total.
    pub fn from_masses(space: SampleSpace, masses: Vec<f64>) -> Result<Self> {
        space.check_len(masses.len())?;
        check_positive(&masses)?;
        let sum: f64 = masses.iter().sum();
        if !sum.is_finite() {
            return Err(Error::NonFinite { index: 0 });
        }
        let p = Self::normalized_unchecked(space, masses, sum);
        check_positive(&p.weights)?;
        Ok(p)
    }

    pub fn uniform(space: SampleSpace) -> Self {
        let n = space.size();
        let weights = alloc::vec![1.0 / n as f64; n];
        Self {
            space,
            weights: weights.into(),
        }
    }

    fn normalized_unchecked(space: SampleSpace, mut weights: Vec<f64>, sum: f64) -> Self {
        if sum != 1.0 {
            weights.iter_mut().for_each(|w| *w /= sum);
        }
        Self {
            space,
            weights: weights.into(),
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Normalized exponential tilt `e^{v} p / E_p[e^v]`, shifted by `max v`.
    pub fn tilt<V: RandomVariable + ?Sized>(&self, v: &V) -> Result<Prob> {
        self.space.check_same(v.space())?;
        let vals = v.values();
        let shift = max_finite(vals)?;
        let masses: Vec<f64> = self
            .weights
            .iter()
            .zip(vals)
            .map(|(p, x)| p * (x - shift).exp())
            .collect();
        Prob::from_masses(self.space.clone(), masses)
    }

    /// Element-wise equality within [`BASE_TOLERANCE`].
    pub fn same_point(&self, other: &Prob) -> bool {
        if Arc::ptr_eq(&self.weights, &other.weights) {
            return self.space == other.space;
        }
        self.space == other.space
            && self
                .weights
                .iter()
                .zip(other.weights.iter())
                .all(|(a, b)| (a - b).abs() <= BASE_TOLERANCE)
    }

    /// Sup-norm distance between the weight vectors.
    pub fn sup_distance(&self, other: &Prob) -> Result<f64> {
        self.space.check_same(&other.space)?;
        Ok(sup_diff(&self.weights, &other.weights))
    }

    /// Total variation distance `½ Σ |p - q|`.
    pub fn total_variation(&self, other: &Prob) -> Result<f64> {
        self.space.check_same(&other.space)?;
        Ok(0.5
            * self
                .weights
                .iter()
                .zip(other.weights.iter())
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }

    /// `log p` as a random variable.
    pub fn log(&self) -> Rv {
        Rv {
            space: self.space.clone(),
            values: self.weights.iter().map(|w| w.ln()).collect(),
        }
    }

    /// The ratio `self / other` as a random variable.
    pub fn ratio(&self, other: &Prob) -> Result<Rv> {
        self.space.check_same(&other.space)?;
        Ok(Rv {
            space: self.space.clone(),
            values: self
                .weights
                .iter()
                .zip(other.weights.iter())
                .map(|(a, b)| a / b)
                .collect(),
        })
    }

    pub fn space(&self) -> &SampleSpace {
        &self.space
    }
}

impl RandomVariable for Prob {
    fn space(&self) -> &SampleSpace {
        &self.space
    }
    fn values(&self) -> &[f64] {
        &self.weights
    }
}

/// A real random variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Rv {
    space: SampleSpace,
    values: Vec<f64>,
}

impl Rv {
    pub fn new(space: SampleSpace, values: Vec<f64>) -> Result<Self> {
        space.check_len(values.len())?;
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { space, values })
    }

    pub fn constant(space: SampleSpace, c: f64) -> Self {
        let values = alloc::vec![c; space.size()];
        Self { space, values }
    }

    /// Indicator of atom `k`.
    pub fn indicator(space: SampleSpace, k: usize) -> Result<Self> {
        if k >= space.size() {
            return Err(Error::InvalidArgument("indicator atom out of range"));
        }
        let mut values = alloc::vec![0.0; space.size()];
        values[k] = 1.0;
        Ok(Self { space, values })
    }

    pub(crate) fn from_parts(space: SampleSpace, values: Vec<f64>) -> Self {
        debug_assert_eq!(space.size(), values.len());
        Self { space, values }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Rv {
        Rv {
            space: self.space.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl RandomVariable for Rv {
    fn space(&self) -> &SampleSpace {
        &self.space
    }
    fn values(&self) -> &[f64] {
        &self.values
    }
}

/// A vector of the fiber at `base`: a `base`-centered random variable.
#[derive(Debug, Clone)]
pub struct Fiber {
    base: Prob,
    values: Vec<f64>,
}

impl Fiber {
    /// Checks centering within `1e-10 * (1 + max|v|)`.
    pub fn new(base: Prob, values: Vec<f64>) -> Result<Self> {
        base.space.check_len(values.len())?;
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let mean = dot(base.weights(), &values);
        if mean.abs() > CENTERING_TOLERANCE * (1.0 + sup_norm(&values)) {
            return Err(Error::NotCentered { mean });
        }
        Ok(Self { base, values })
    }

    pub fn zero(base: Prob) -> Self {
        let values = alloc::vec![0.0; base.len()];
        Self { base, values }
    }

    /// Wraps values that are centered at `base` by construction.
    pub(crate) fn from_parts(base: Prob, values: Vec<f64>) -> Self {
        debug_assert_eq!(base.len(), values.len());
        debug_assert!(
            dot(base.weights(), &values).abs() <= CENTERING_TOLERANCE * (1.0 + sup_norm(&values)),
            "fiber value not centered"
        );
        Self { base, values }
    }

    /// Subtracts the `base` mean from arbitrary values.
    pub(crate) fn centering(base: Prob, mut values: Vec<f64>) -> Self {
        let mean = dot(base.weights(), &values);
        values.iter_mut().for_each(|v| *v -= mean);
        Self { base, values }
    }

    pub fn base(&self) -> &Prob {
        &self.base
    }

    pub fn to_rv(&self) -> Rv {
        Rv::from_parts(self.base.space.clone(), self.values.clone())
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn check_base(&self, base: &Prob) -> Result<()> {
        if self.base.same_point(base) {
            Ok(())
        } else {
            Err(Error::BaseMismatch)
        }
    }

    /// Covariance pairing `<self, other>_base`.
    pub fn inner(&self, other: &Fiber) -> Result<f64> {
        other.check_base(&self.base)?;
        Ok(self
            .base
            .weights()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(p, (a, b))| p * a * b)
            .sum())
    }

    /// Fiber norm `sqrt(<v, v>_base)`.
    pub fn norm(&self) -> f64 {
        self.base
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(p, v)| p * v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(&self.values)
    }

    pub fn scale(&self, c: f64) -> Fiber {
        Fiber {
            base: self.base.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &Fiber) -> Result<Fiber> {
        other.check_base(&self.base)?;
        Ok(Fiber {
            base: self.base.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Fiber) -> Result<Fiber> {
        self.add(&other.scale(-1.0))
    }

    /// Sup-norm distance to a fiber vector at the same base.
    pub fn sup_distance(&self, other: &Fiber) -> Result<f64> {
        other.check_base(&self.base)?;
        Ok(sup_diff(&self.values, &other.values))
    }
}

impl RandomVariable for Fiber {
    fn space(&self) -> &SampleSpace {
        &self.base.space
    }
    fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `E_p[u]`.
pub fn expect<U: RandomVariable + ?Sized>(p: &Prob, u: &U) -> Result<f64> {
    p.space.check_same(u.space())?;
    Ok(dot(p.weights(), u.values()))
}

/// `Cov_p(u, w) = E_p[u w] - E_p[u] E_p[w]`, computed on centered values.
pub fn cov<U, W>(p: &Prob, u: &U, w: &W) -> Result<f64>
where
    U: RandomVariable + ?Sized,
    W: RandomVariable + ?Sized,
{
    let mu = expect(p, u)?;
    let mw = expect(p, w)?;
    Ok(p
        .weights()
        .iter()
        .zip(u.values().iter().zip(w.values()))
        .map(|(pi, (a, b))| pi * (a - mu) * (b - mw))
        .sum())
}

/// Projection `u - E_p[u]` onto the fiber at `p`.
pub fn center<U: RandomVariable + ?Sized>(p: &Prob, u: &U) -> Result<Fiber> {
    p.space.check_same(u.space())?;
    Ok(Fiber::centering(p.clone(), u.values().to_vec()))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub(crate) fn max_finite(v: &[f64]) -> Result<f64> {
    let mut m = f64::NEG_INFINITY;
    for (index, x) in v.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFinite { index });
        }
        m = m.max(*x);
    }
    Ok(m)
}

fn check_positive(w: &[f64]) -> Result<()> {
    for (index, &value) in w.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite { index });
        }
        if value < MIN_WEIGHT {
            return Err(Error::NonPositive { index, value });
        }
    }
    Ok(())
}
