//! Seeded sampling of Hilbert–Schmidt states and Haar bases.
//!
//! The generator is ChaCha8 seeded from a `u64`, with the stream id selecting an
//! independent sequence. Monte Carlo loops use the sample index as the stream,
//! so results do not depend on how samples are spread across threads.

use num_complex::Complex;
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::linalg::{CMatrix, CVector};
use super::measurement::ProjectiveMeasurement;
use super::state::{check_dim, DensityMatrix};
use crate::error::{invalid, Result};
use crate::scalar::Real;

pub type SampleRng = ChaCha8Rng;

pub fn rng_for(seed: u64, stream: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `dim x dim` matrix of independent standard complex Gaussians.
pub fn ginibre<T: Real>(dim: usize, rng: &mut SampleRng) -> CMatrix<T> {
    CMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex::new(T::lit(re), T::lit(im))
    })
}

/// `G G^dagger / Tr(G G^dagger)`.
pub fn state_from_ginibre<T: Real>(g: &CMatrix<T>) -> Result<DensityMatrix<T>> {
    if !g.is_square() {
        return Err(invalid("generator matrix must be square"));
    }
    check_dim(g.nrows())?;
    let w = g * g.adjoint();
    let tr = w.trace().re;
    if tr <= T::zero() {
        return Err(invalid("generator matrix is zero"));
    }
    let half = Complex::new(T::lit(0.5) / tr, T::zero());
    Ok(DensityMatrix::from_trusted((&w + w.adjoint()) * half))
}

/// Orthonormalizes the columns of `m` by modified Gram–Schmidt.
///
/// Gram–Schmidt fixes every diagonal entry of the implied `R` factor to be
/// real and positive, which makes the result Haar distributed when `m` is
/// Ginibre.
pub fn basis_from_gaussian<T: Real>(m: &CMatrix<T>) -> Result<ProjectiveMeasurement<T>> {
    if !m.is_square() {
        return Err(invalid("basis generator must be square"));
    }
    check_dim(m.nrows())?;
    let mut basis: Vec<CVector<T>> = Vec::with_capacity(m.ncols());
    for col in m.column_iter() {
        let mut v: CVector<T> = col.into_owned();
        // Two passes keep orthogonality at machine precision.
        for _ in 0..2 {
            for q in &basis {
                let proj = q.dotc(&v);
                v -= q * proj;
            }
        }
        let norm = v.norm();
        if norm <= Float::sqrt(T::epsilon()) {
            return Err(invalid("basis generator is numerically singular"));
        }
        basis.push(v.unscale(norm));
    }
    ProjectiveMeasurement::new(basis)
}

pub fn random_state_with<T: Real>(dim: usize, rng: &mut SampleRng) -> Result<DensityMatrix<T>> {
    check_dim(dim)?;
    state_from_ginibre(&ginibre::<T>(dim, rng))
}

pub fn random_basis_with<T: Real>(
    dim: usize,
    rng: &mut SampleRng,
) -> Result<ProjectiveMeasurement<T>> {
    check_dim(dim)?;
    basis_from_gaussian(&ginibre::<T>(dim, rng))
}

/// Hilbert–Schmidt random state; identical output for identical seeds.
pub fn random_state<T: Real>(dim: usize, seed: u64) -> Result<DensityMatrix<T>> {
    random_state_with(dim, &mut rng_for(seed, 0))
}

/// Haar random orthonormal basis; identical output for identical seeds.
pub fn random_basis<T: Real>(dim: usize, seed: u64) -> Result<ProjectiveMeasurement<T>> {
    random_basis_with(dim, &mut rng_for(seed, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outputs_are_valid_and_deterministic() {
        for dim in 2..=6 {
            for seed in 0..50 {
                let rho = random_state::<f64>(dim, seed).unwrap();
                DensityMatrix::new(rho.matrix().clone()).unwrap();
                assert_eq!(rho, random_state::<f64>(dim, seed).unwrap());
                let b = random_basis::<f64>(dim, seed).unwrap();
                ProjectiveMeasurement::new(b.vectors().to_vec()).unwrap();
                assert_eq!(b, random_basis::<f64>(dim, seed).unwrap());
            }
        }
        assert_ne!(
            random_state::<f64>(3, 1).unwrap(),
            random_state::<f64>(3, 2).unwrap()
        );
    }

    #[test]
    fn rejects_bad_dims() {
        assert!(random_state::<f64>(1, 0).is_err());
        assert!(random_basis::<f64>(0, 0).is_err());
        assert!(random_state::<f64>(7, 0).is_err());
    }

    #[test]
    fn streams_are_independent() {
        use rand::Rng;
        let a: u64 = rng_for(5, 0).random();
        let b: u64 = rng_for(5, 1).random();
        assert_ne!(a, b);
    }

    #[test]
    fn f32_sampling_passes_invariants() {
        let rho = random_state::<f32>(3, 9).unwrap();
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-5);
        random_basis::<f32>(4, 9).unwrap();
    }

    /// Qubit Hilbert–Schmidt purity by hand: draws `G` with Box–Muller and
    /// evaluates `Tr(W^2)/Tr(W)^2` for `W = G G^dagger` with scalar arithmetic.
    fn oracle_mean_purity(samples: usize) -> f64 {
        use rand::Rng;
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(0xdead);
        let mut gauss = || {
            let u1: f64 = 1.0 - rng.random::<f64>();
            let u2: f64 = rng.random();
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        };
        let mut total = 0.0;
        for _ in 0..samples {
            let g: Vec<(f64, f64)> = (0..4).map(|_| (gauss(), gauss())).collect();
            // rows (g0, g1), (g2, g3)
            let n0 = g[0].0.powi(2) + g[0].1.powi(2) + g[1].0.powi(2) + g[1].1.powi(2);
            let n1 = g[2].0.powi(2) + g[2].1.powi(2) + g[3].0.powi(2) + g[3].1.powi(2);
            // <row0, row1>
            let re = g[0].0 * g[2].0 + g[0].1 * g[2].1 + g[1].0 * g[3].0 + g[1].1 * g[3].1;
            let im = g[0].1 * g[2].0 - g[0].0 * g[2].1 + g[1].1 * g[3].0 - g[1].0 * g[3].1;
            let tr = n0 + n1;
            total += (n0 * n0 + n1 * n1 + 2.0 * (re * re + im * im)) / (tr * tr);
        }
        total / samples as f64
    }

    #[test]
    fn qubit_mean_purity_matches_independent_sampler() {
        let n = 10_000;
        let oracle = oracle_mean_purity(n);
        assert!((oracle - 0.8).abs() < 0.01, "oracle {oracle}");
        let mean: f64 = (0..n as u64)
            .map(|k| random_state_with::<f64>(2, &mut rng_for(1, k)).unwrap().purity())
            .sum::<f64>()
            / n as f64;
        assert!((mean - oracle).abs() < 0.02, "{mean} vs {oracle}");
    }
}
