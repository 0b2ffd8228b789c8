use num_complex::Complex;
use num_traits::Float;

use super::linalg::{hermitian_eigenvalues, hermiticity_defect, CMatrix, CVector};
use super::{MAX_DIM, MIN_DIM};
use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    mat: CMatrix<T>,
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if (MIN_DIM..=MAX_DIM).contains(&dim) {
        Ok(())
    } else {
        Err(invalid(format!(
            "dimension {dim} outside supported range {MIN_DIM}..={MAX_DIM}"
        )))
    }
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(mat: CMatrix<T>) -> Result<Self> {
        if !mat.is_square() {
            return Err(invalid("density matrix must be square"));
        }
        check_dim(mat.nrows())?;
        let tol = T::matrix_tolerance();
        let defect = hermiticity_defect(&mat);
        if defect > tol {
            return Err(invalid(format!("state is not Hermitian (defect {defect})")));
        }
        let tr = mat.trace();
        if Float::abs(tr.re - T::one()) > tol || Float::abs(tr.im) > tol {
            return Err(invalid(format!("state trace is {tr}, not 1")));
        }
        let min_eig = hermitian_eigenvalues(&mat)?[0];
        if min_eig < -tol {
            return Err(invalid(format!(
                "state is not positive semidefinite (min eigenvalue {min_eig})"
            )));
        }
        Ok(Self { mat })
    }

    /// Skips validation; callers guarantee the invariants by construction.
    pub(crate) fn from_trusted(mat: CMatrix<T>) -> Self {
        debug_assert!(mat.is_square());
        Self { mat }
    }

    /// `|psi><psi|` for a (not necessarily normalized) nonzero vector.
    pub fn from_pure(psi: &CVector<T>) -> Result<Self> {
        let norm = psi.norm();
        if norm <= T::matrix_tolerance() {
            return Err(invalid("pure state vector is zero"));
        }
        let v = psi.unscale(norm);
        Self::new(&v * v.adjoint())
    }

    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        check_dim(dim)?;
        if index >= dim {
            return Err(invalid(format!("basis index {index} out of range for d={dim}")));
        }
        let mut mat = CMatrix::zeros(dim, dim);
        mat[(index, index)] = Complex::new(T::one(), T::zero());
        Self::new(mat)
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let w = T::one() / T::from_usize(dim).expect("small dim");
        Self::new(CMatrix::identity(dim, dim) * Complex::new(w, T::zero()))
    }

    /// Two-qubit singlet `(|01> - |10>)/sqrt(2)`.
    pub fn singlet() -> Self {
        let s = T::one() / Float::sqrt(T::lit(2.0));
        let z = Complex::new(T::zero(), T::zero());
        let psi = CVector::from_vec(vec![z, Complex::new(s, T::zero()), Complex::new(-s, T::zero()), z]);
        Self::from_pure(&psi).expect("singlet is a valid state")
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        Self::new(self.mat.kronecker(&other.mat))
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.mat
    }

    pub fn purity(&self) -> T {
        (&self.mat * &self.mat).trace().re
    }
}
