//! Exact finite-dimensional quantum mechanics for dimensions 2 through 6.
//!
//! States are density matrices, measurements are rank-1 projective bases.
//! Everything here is immutable after construction and all sampling takes an
//! explicit seed.

mod linalg;
mod measurement;
mod random;
mod state;
mod transition;

pub use linalg::{hermitian_eigenvalues, trace_norm, CMatrix, CVector};
pub use measurement::ProjectiveMeasurement;
pub use random::{
    basis_from_gaussian, ginibre, random_basis, random_basis_with, random_state,
    random_state_with, rng_for, state_from_ginibre, SampleRng,
};
pub use state::DensityMatrix;
pub use transition::TransitionMatrix;

use crate::error::{check_dims, Result};
use crate::prob::ProbDist;
use crate::scalar::Real;

/// Smallest supported Hilbert-space dimension.
pub const MIN_DIM: usize = 2;
/// Largest supported Hilbert-space dimension.
pub const MAX_DIM: usize = 6;

/// Born rule: `p_j = <a_j| rho |a_j>`.
pub fn born_probabilities<T: Real>(
    state: &DensityMatrix<T>,
    meas: &ProjectiveMeasurement<T>,
) -> Result<ProbDist<T>> {
    check_dims(state.dim(), meas.dim())?;
    let rho = state.matrix();
    let probs = meas
        .vectors()
        .iter()
        .map(|v| (v.adjoint() * rho * v)[(0, 0)].re)
        .collect();
    ProbDist::new(probs)
}

/// Lüders dephasing `sum_j P_j rho P_j` in the measurement basis.
pub fn dephase<T: Real>(
    state: &DensityMatrix<T>,
    meas: &ProjectiveMeasurement<T>,
) -> Result<DensityMatrix<T>> {
    let probs = born_probabilities(state, meas)?;
    let d = state.dim();
    let mut out = CMatrix::<T>::zeros(d, d);
    for (j, v) in meas.vectors().iter().enumerate() {
        let w = num_complex::Complex::new(probs.get(j), T::zero());
        out += v * v.adjoint() * w;
    }
    Ok(DensityMatrix::from_trusted(out))
}

/// `P(i | second, S_mu|first) = |<b_i|a_mu>|^2`, rows indexed by `second`.
pub fn transition_matrix<T: Real>(
    first: &ProjectiveMeasurement<T>,
    second: &ProjectiveMeasurement<T>,
) -> Result<TransitionMatrix<T>> {
    check_dims(first.dim(), second.dim())?;
    let rows = second.dim();
    let cols = first.dim();
    let mut entries = Vec::with_capacity(rows * cols);
    for b in second.vectors() {
        for a in first.vectors() {
            entries.push(b.dotc(a).norm_sqr());
        }
    }
    TransitionMatrix::new(rows, cols, entries)
}
