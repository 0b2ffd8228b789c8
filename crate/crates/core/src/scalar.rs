//! Scalar abstraction shared by every module.
//!
//! Probability tables and the CHSH functional only need field arithmetic, so
//! they accept any [`Scalar`], including exact rationals. Anything that takes
//! square roots of non-squares or diagonalizes a matrix needs a [`Real`].

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_rational::Rational64;
use num_traits::{Float, FloatConst, FromPrimitive, Signed, ToPrimitive};

/// Field element usable for probabilities.
pub trait Scalar:
    Copy + PartialOrd + Debug + Display + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Absolute slack allowed on probability sums and no-signaling equalities.
    fn prob_tolerance() -> Self;

    /// Square root, when it is representable in this type.
    fn try_sqrt(self) -> Option<Self>;

    /// Converts an `f64` literal. Panics only for non-finite input.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }
}

/// Floating-point scalar with linear-algebra support.
pub trait Real: Scalar + Float + FloatConst + RealField {
    /// Entrywise slack for Hermiticity, trace and positivity checks.
    fn matrix_tolerance() -> Self;
}

impl Scalar for f64 {
    fn prob_tolerance() -> Self {
        1e-12
    }

    fn try_sqrt(self) -> Option<Self> {
        (self >= 0.0).then(|| Float::sqrt(self))
    }
}

impl Real for f64 {
    fn matrix_tolerance() -> Self {
        1e-10
    }
}

// f32 keeps about 7 digits; both slacks are scaled to that precision.
impl Scalar for f32 {
    fn prob_tolerance() -> Self {
        1e-5
    }

    fn try_sqrt(self) -> Option<Self> {
        (self >= 0.0).then(|| Float::sqrt(self))
    }
}

impl Real for f32 {
    fn matrix_tolerance() -> Self {
        1e-4
    }
}

impl Scalar for Rational64 {
    fn prob_tolerance() -> Self {
        Rational64::from_integer(0)
    }

    fn try_sqrt(self) -> Option<Self> {
        if self < Rational64::from_integer(0) {
            return None;
        }
        let num = exact_isqrt(*self.numer())?;
        let den = exact_isqrt(*self.denom())?;
        Some(Rational64::new(num, den))
    }
}

fn exact_isqrt(n: i64) -> Option<i64> {
    if n < 0 {
        return None;
    }
    let mut r = (n as f64).sqrt() as i64;
    while r > 0 && r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    (r * r == n).then_some(r)
}
