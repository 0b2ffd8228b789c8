//! Finite outcome distributions, the uncertainty measure and the L1 distance.

use crate::error::{check_dims, invalid, Error, Result};
use crate::scalar::Scalar;

/// Probability distribution over outcome labels `0..d`, `d >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDist<T> {
    probs: Vec<T>,
}

impl<T: Scalar> ProbDist<T> {
    /// Validates and stores `probs`.
    ///
    /// Entries within [`Scalar::prob_tolerance`] outside `[0, 1]` are clipped
    /// onto the boundary; anything further out is rejected, as is a sum that
    /// misses 1 by more than the tolerance.
    pub fn new(probs: Vec<T>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(invalid(format!(
                "distribution needs at least 2 outcomes, got {}",
                probs.len()
            )));
        }
        let tol = T::prob_tolerance();
        let zero = T::zero();
        let one = T::one();
        let mut clipped = Vec::with_capacity(probs.len());
        let mut sum = zero;
        for (i, &p) in probs.iter().enumerate() {
            let v = if p < zero {
                if zero - p > tol {
                    return Err(invalid(format!("probability {i} is negative: {p}")));
                }
                zero
            } else if p > one {
                if p - one > tol {
                    return Err(invalid(format!("probability {i} exceeds 1: {p}")));
                }
                one
            } else {
                p
            };
            sum = sum + p;
            clipped.push(v);
        }
        if (sum - one).abs() > tol {
            return Err(invalid(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Self { probs: clipped })
    }

    pub fn uniform(d: usize) -> Result<Self> {
        let n = T::from_usize(d).ok_or_else(|| invalid("outcome count overflow"))?;
        Self::new(vec![T::one() / n; d])
    }

    /// Point mass on `outcome`.
    pub fn deterministic(d: usize, outcome: usize) -> Result<Self> {
        if outcome >= d {
            return Err(invalid(format!("outcome {outcome} out of range for d={d}")));
        }
        let mut probs = vec![T::zero(); d];
        probs[outcome] = T::one();
        Self::new(probs)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn get(&self, outcome: usize) -> T {
        self.probs[outcome]
    }

    /// `p(0) - p(1)` for two-outcome distributions.
    pub fn expectation(&self) -> Result<T> {
        check_dims(2, self.len())?;
        Ok(self.probs[0] - self.probs[1])
    }

    pub fn is_deterministic(&self) -> bool {
        let tol = T::prob_tolerance();
        self.probs.iter().any(|&p| (p - T::one()).abs() <= tol)
    }
}

/// `(sum_a sqrt(p(a)))^2 - 1`.
///
/// For exact scalar types this fails with [`Error::Inexact`] when some entry
/// has no exact square root.
pub fn uncertainty<T: Scalar>(dist: &ProbDist<T>) -> Result<T> {
    let mut root_sum = T::zero();
    for &p in dist.probs() {
        root_sum = root_sum
            + p.try_sqrt()
                .ok_or_else(|| Error::Inexact(format!("sqrt({p})")))?;
    }
    let value = root_sum * root_sum - T::one();
    // Roundoff can push a deterministic distribution a hair below zero.
    Ok(if value < T::zero() { T::zero() } else { value })
}

/// `sum_a |p(a) - q(a)|`.
pub fn l1_distance<T: Scalar>(p: &ProbDist<T>, q: &ProbDist<T>) -> Result<T> {
    check_dims(p.len(), q.len())?;
    Ok(p.probs()
        .iter()
        .zip(q.probs())
        .fold(T::zero(), |acc, (&a, &b)| acc + (a - b).abs()))
}
