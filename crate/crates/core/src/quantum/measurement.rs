use num_complex::Complex;
use num_traits::Float;

use super::linalg::{CMatrix, CVector};
use super::state::check_dim;
use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Sharp measurement given by an orthonormal basis; outcome `j` is `|a_j>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveMeasurement<T: Real> {
    basis: Vec<CVector<T>>,
}

impl<T: Real> ProjectiveMeasurement<T> {
    pub fn new(basis: Vec<CVector<T>>) -> Result<Self> {
        let d = basis.len();
        check_dim(d)?;
        if let Some(v) = basis.iter().find(|v| v.len() != d) {
            return Err(invalid(format!(
                "basis vector has length {}, expected {d}",
                v.len()
            )));
        }
        let tol = T::matrix_tolerance();
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate().skip(i) {
                let expected = if i == j { T::one() } else { T::zero() };
                let ip = a.dotc(b);
                let err = Float::sqrt((ip - Complex::new(expected, T::zero())).norm_sqr());
                if err > tol {
                    return Err(invalid(format!(
                        "basis vectors {i},{j} not orthonormal (error {err})"
                    )));
                }
            }
        }
        let meas = Self { basis };
        let completeness = (meas.resolution_of_identity() - CMatrix::identity(d, d)).camax();
        if completeness > tol {
            return Err(invalid(format!("basis is incomplete (error {completeness})")));
        }
        Ok(meas)
    }

    /// Columns of a unitary matrix as the measurement basis.
    pub fn from_unitary(u: &CMatrix<T>) -> Result<Self> {
        Self::new(u.column_iter().map(|c| c.into_owned()).collect())
    }

    pub fn computational(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Self::from_unitary(&CMatrix::identity(dim, dim))
    }

    /// Qubit measurement of `cos(theta) X + sin(theta) Y`; outcome 0 is the +1 eigenvector.
    pub fn equatorial(theta: T) -> Self {
        let s = T::one() / Float::sqrt(T::lit(2.0));
        let phase = Complex::new(Float::cos(theta), Float::sin(theta)) * s;
        let c = Complex::new(s, T::zero());
        let plus = CVector::from_vec(vec![c, phase]);
        let minus = CVector::from_vec(vec![c, -phase]);
        Self::new(vec![plus, minus]).expect("equatorial basis is orthonormal")
    }

    pub fn sigma_x() -> Self {
        Self::equatorial(T::zero())
    }

    pub fn sigma_y() -> Self {
        Self::equatorial(T::FRAC_PI_2())
    }

    pub fn sigma_z() -> Self {
        Self::computational(2).expect("qubit")
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn vectors(&self) -> &[CVector<T>] {
        &self.basis
    }

    pub fn projector(&self, outcome: usize) -> CMatrix<T> {
        let v = &self.basis[outcome];
        v * v.adjoint()
    }

    /// Same projectors, with outcome labels permuted: new outcome `k` is old `perm[k]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.dim() {
            return Err(invalid("permutation length differs from dimension"));
        }
        let mut seen = vec![false; perm.len()];
        for &p in perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(invalid("not a permutation"));
            }
        }
        Ok(Self {
            basis: perm.iter().map(|&p| self.basis[p].clone()).collect(),
        })
    }

    fn resolution_of_identity(&self) -> CMatrix<T> {
        let d = self.dim();
        self.basis
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, v| acc + v * v.adjoint())
    }
}
