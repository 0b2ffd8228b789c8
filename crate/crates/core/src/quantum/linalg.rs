use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use num_traits::Float;

use crate::error::{invalid, Result};
use crate::scalar::Real;

pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

pub(crate) fn hermiticity_defect<T: Real>(m: &CMatrix<T>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm_sqr();
            worst = Float::max(worst, Float::sqrt(d));
        }
    }
    worst
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues<T: Real>(m: &CMatrix<T>) -> Result<Vec<T>> {
    if !m.is_square() {
        return Err(invalid(format!(
            "matrix must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let defect = hermiticity_defect(m);
    if defect > T::matrix_tolerance() {
        return Err(invalid(format!("matrix is not Hermitian (defect {defect})")));
    }
    // Symmetrize so the solver sees an exactly Hermitian input.
    let half = Complex::new(T::lit(0.5), T::zero());
    let sym = (m + m.adjoint()) * half;
    let mut vals: Vec<T> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(vals)
}

/// `Tr|H|`, the sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm<T: Real>(h: &CMatrix<T>) -> Result<T> {
    Ok(hermitian_eigenvalues(h)?
        .into_iter()
        .fold(T::zero(), |acc, v| acc + Float::abs(v)))
}
