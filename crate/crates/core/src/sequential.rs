//! Sequential measurements, disturbance and the quantum balance relation.
//!
//! For a state `rho` and sharp measurements `A` then `A'`, the disturbance is
//! the L1 distance between the statistics of `A'` with and without `A`
//! performed first. The balance report carries the four-term chain
//!
//! `D <= Tr|rho - rho_A| <= sum_{i<j} 2|<a_i|rho|a_j>| <= delta_A`
//!
//! whose outer inequality is the balance relation.

use num_complex::Complex;
use num_traits::Float;
use rayon::prelude::*;

use crate::error::{check_dims, invalid, Error, Result};
use crate::prob::{l1_distance, uncertainty, ProbDist};
use crate::quantum::{
    basis_from_gaussian, born_probabilities, dephase, ginibre, rng_for, state_from_ginibre,
    trace_norm, transition_matrix, CMatrix, DensityMatrix, ProjectiveMeasurement,
};
use crate::scalar::Real;

/// Ratios are only formed when the disturbance exceeds this.
pub const DEFAULT_DISTURBANCE_THRESHOLD: f64 = 1e-6;

/// Maximum coordinate-descent sweeps after the Monte Carlo stage.
pub const REFINE_SWEEPS: usize = 200;
/// Refinement stops once a sweep improves the ratio by less than this, relatively.
pub const REFINE_REL_IMPROVEMENT: f64 = 1e-10;

/// `p_{a|A -> A'}`: statistics of `second` on the state dephased by `first`.
pub fn sequential_distribution<T: Real>(
    state: &DensityMatrix<T>,
    first: &ProjectiveMeasurement<T>,
    second: &ProjectiveMeasurement<T>,
) -> Result<ProbDist<T>> {
    check_dims(first.dim(), second.dim())?;
    born_probabilities(&dephase(state, first)?, second)
}

/// Same quantity as [`sequential_distribution`], computed as the transition
/// matrix applied to the first measurement's statistics.
pub fn sequential_distribution_via_transition<T: Real>(
    state: &DensityMatrix<T>,
    first: &ProjectiveMeasurement<T>,
    second: &ProjectiveMeasurement<T>,
) -> Result<ProbDist<T>> {
    transition_matrix(first, second)?.apply(&born_probabilities(state, first)?)
}

/// `D_{A -> A'}`.
pub fn disturbance<T: Real>(
    state: &DensityMatrix<T>,
    first: &ProjectiveMeasurement<T>,
    second: &ProjectiveMeasurement<T>,
) -> Result<T> {
    let direct = born_probabilities(state, second)?;
    let sequential = sequential_distribution(state, first, second)?;
    l1_distance(&direct, &sequential)
}

/// `sigma_ij = P_i rho P_j + P_j rho P_i` for `i != j`.
pub fn coherence_pair<T: Real>(
    state: &DensityMatrix<T>,
    meas: &ProjectiveMeasurement<T>,
    i: usize,
    j: usize,
) -> Result<CMatrix<T>> {
    check_dims(state.dim(), meas.dim())?;
    if i == j || i >= meas.dim() || j >= meas.dim() {
        return Err(invalid(format!("invalid outcome pair ({i}, {j})")));
    }
    let pi = meas.projector(i);
    let pj = meas.projector(j);
    let rho = state.matrix();
    Ok(&pi * rho * &pj + &pj * rho * &pi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceReport<T> {
    pub uncertainty: T,
    pub disturbance: T,
    /// `uncertainty / disturbance`, present only above the disturbance threshold.
    pub ratio: Option<T>,
    /// Disturbance, trace distance to the dephased state, coherence sum, uncertainty.
    pub chain: [T; 4],
}

impl<T: Real> BalanceReport<T> {
    /// Smallest gap between consecutive chain terms; negative means a violation.
    pub fn slack(&self) -> T {
        self.chain
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(T::infinity(), Float::min)
    }

    /// `uncertainty - disturbance`.
    pub fn balance_gap(&self) -> T {
        self.uncertainty - self.disturbance
    }

    pub fn is_monotone(&self, tol: T) -> bool {
        self.slack() >= -tol
    }
}

pub fn balance_report<T: Real>(
    state: &DensityMatrix<T>,
    first: &ProjectiveMeasurement<T>,
    second: &ProjectiveMeasurement<T>,
) -> Result<BalanceReport<T>> {
    balance_report_with_threshold(state, first, second, T::lit(DEFAULT_DISTURBANCE_THRESHOLD))
}

pub fn balance_report_with_threshold<T: Real>(
    state: &DensityMatrix<T>,
    first: &ProjectiveMeasurement<T>,
    second: &ProjectiveMeasurement<T>,
    d_threshold: T,
) -> Result<BalanceReport<T>> {
    check_dims(state.dim(), first.dim())?;
    check_dims(first.dim(), second.dim())?;
    let dist = disturbance(state, first, second)?;
    let dephased = dephase(state, first)?;
    let trace_dist = trace_norm(&(state.matrix() - dephased.matrix()))?;

    let rho = state.matrix();
    let basis = first.vectors();
    let mut coherence = T::zero();
    for i in 0..basis.len() {
        for j in (i + 1)..basis.len() {
            let elem: Complex<T> = basis[i].dotc(&(rho * &basis[j]));
            coherence = coherence + T::lit(2.0) * Float::sqrt(elem.norm_sqr());
        }
    }
    let delta = uncertainty(&born_probabilities(state, first)?)?;
    Ok(BalanceReport {
        uncertainty: delta,
        disturbance: dist,
        ratio: (dist > d_threshold).then(|| delta / dist),
        chain: [dist, trace_dist, coherence, delta],
    })
}

/// Result of a balance-strength search. `upper_bound` bounds the true
/// balance strength from above: it is the ratio of one concrete instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceEstimate<T> {
    pub upper_bound: T,
    /// Monte Carlo minimum before refinement.
    pub sampled_min: T,
    /// Number of samples whose disturbance exceeded the threshold.
    pub informative_samples: usize,
    /// Index of the sample refinement started from.
    pub best_sample: u64,
    pub refinement_sweeps: usize,
}

/// Gaussian generators of one `(rho, A, A')` instance.
#[derive(Debug, Clone)]
struct Generators<T: Real> {
    dim: usize,
    params: Vec<T>,
}

impl<T: Real> Generators<T> {
    fn sample(dim: usize, seed: u64, index: u64) -> Self {
        let mut rng = rng_for(seed, index);
        let mut params = Vec::with_capacity(6 * dim * dim);
        for _ in 0..3 {
            for c in ginibre::<T>(dim, &mut rng).iter() {
                params.push(c.re);
                params.push(c.im);
            }
        }
        Self { dim, params }
    }

    fn matrix(&self, block: usize) -> CMatrix<T> {
        let d = self.dim;
        let off = block * 2 * d * d;
        // nalgebra stores column-major; keep the same order as `ginibre` iteration.
        CMatrix::from_iterator(
            d,
            d,
            (0..d * d).map(|k| Complex::new(self.params[off + 2 * k], self.params[off + 2 * k + 1])),
        )
    }

    fn instance(
        &self,
    ) -> Result<(DensityMatrix<T>, ProjectiveMeasurement<T>, ProjectiveMeasurement<T>)> {
        Ok((
            state_from_ginibre(&self.matrix(0))?,
            basis_from_gaussian(&self.matrix(1))?,
            basis_from_gaussian(&self.matrix(2))?,
        ))
    }

    fn ratio(&self, d_threshold: T) -> Option<T> {
        let (rho, a, b) = self.instance().ok()?;
        instance_ratio(&rho, &a, &b, d_threshold)
    }
}

fn instance_ratio<T: Real>(
    rho: &DensityMatrix<T>,
    first: &ProjectiveMeasurement<T>,
    second: &ProjectiveMeasurement<T>,
    d_threshold: T,
) -> Option<T> {
    let dist = disturbance(rho, first, second).ok()?;
    if dist <= d_threshold {
        return None;
    }
    let delta = uncertainty(&born_probabilities(rho, first).ok()?).ok()?;
    Some(delta / dist)
}

/// Minimum of `delta / D` over the given instances, skipping those with
/// disturbance at or below `d_threshold`.
pub fn balance_strength_over<T: Real>(
    instances: &[(DensityMatrix<T>, ProjectiveMeasurement<T>, ProjectiveMeasurement<T>)],
    d_threshold: T,
) -> Result<T> {
    instances
        .iter()
        .filter_map(|(rho, a, b)| instance_ratio(rho, a, b, d_threshold))
        .fold(None, |best: Option<T>, r| Some(best.map_or(r, |b| Float::min(b, r))))
        .ok_or(Error::NoData {
            threshold: d_threshold.to_f64().unwrap_or(f64::NAN),
        })
}

/// Upper estimate of the quantum balance strength in dimension `dim`.
pub fn estimate_balance_strength<T: Real>(
    dim: usize,
    samples: usize,
    seed: u64,
    d_threshold: T,
) -> Result<T> {
    Ok(estimate_balance_strength_detailed(dim, samples, seed, d_threshold, true)?.upper_bound)
}

/// Monte Carlo over seeded instances followed, if `refine`, by coordinate
/// descent on the Gaussian generators of the best instance.
pub fn estimate_balance_strength_detailed<T: Real>(
    dim: usize,
    samples: usize,
    seed: u64,
    d_threshold: T,
    refine: bool,
) -> Result<BalanceEstimate<T>> {
    if samples == 0 {
        return Err(invalid("samples must be at least 1"));
    }
    if !(d_threshold > T::zero()) {
        return Err(invalid("disturbance threshold must be positive"));
    }
    crate::quantum::DensityMatrix::<T>::maximally_mixed(dim)?;

    let ratios: Vec<(u64, T)> = (0..samples as u64)
        .into_par_iter()
        .filter_map(|k| Generators::<T>::sample(dim, seed, k).ratio(d_threshold).map(|r| (k, r)))
        .collect();
    let informative = ratios.len();
    // Ties go to the smaller index so the result is independent of scheduling.
    let (best_index, sampled_min) = ratios
        .into_iter()
        .reduce(|a, b| if b.1 < a.1 { b } else { a })
        .ok_or(Error::NoData {
            threshold: d_threshold.to_f64().unwrap_or(f64::NAN),
        })?;

    let mut estimate = BalanceEstimate {
        upper_bound: sampled_min,
        sampled_min,
        informative_samples: informative,
        best_sample: best_index,
        refinement_sweeps: 0,
    };
    if refine {
        let start = Generators::<T>::sample(dim, seed, best_index);
        let (value, sweeps) = coordinate_descent(start, sampled_min, d_threshold);
        estimate.upper_bound = value;
        estimate.refinement_sweeps = sweeps;
    }
    Ok(estimate)
}

fn coordinate_descent<T: Real>(mut gens: Generators<T>, mut best: T, d_threshold: T) -> (T, usize) {
    let mut step = T::lit(0.25);
    let min_step = T::lit(1e-12);
    let rel_tol = T::lit(REFINE_REL_IMPROVEMENT);
    let mut sweeps = 0;
    while sweeps < REFINE_SWEEPS && step > min_step {
        sweeps += 1;
        let before = best;
        for k in 0..gens.params.len() {
            let orig = gens.params[k];
            let mut chosen = orig;
            for cand in [orig + step, orig - step] {
                gens.params[k] = cand;
                if let Some(r) = gens.ratio(d_threshold) {
                    if r < best {
                        best = r;
                        chosen = cand;
                    }
                }
            }
            gens.params[k] = chosen;
        }
        if best < before {
            if (before - best) / Float::abs(best) < rel_tol {
                break;
            }
        } else {
            step = step * T::lit(0.5);
        }
    }
    (best, sweeps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{random_basis, random_state};

    fn saturation() -> (DensityMatrix<f64>, ProjectiveMeasurement<f64>, ProjectiveMeasurement<f64>) {
        (
            DensityMatrix::basis_state(2, 0).unwrap(),
            ProjectiveMeasurement::sigma_x(),
            ProjectiveMeasurement::sigma_z(),
        )
    }

    #[test]
    fn sequential_examples() {
        let (rho, x, z) = saturation();
        let p = sequential_distribution(&rho, &x, &z).unwrap();
        assert!((p.get(0) - 0.5).abs() < 1e-15 && (p.get(1) - 0.5).abs() < 1e-15);

        let same = sequential_distribution(&rho, &x, &x).unwrap();
        let direct = born_probabilities(&rho, &x).unwrap();
        assert!(l1_distance(&same, &direct).unwrap() < 1e-15);

        // Compatible pair: second basis is a relabeling of the first.
        let r = random_state::<f64>(3, 1).unwrap();
        let a = random_basis::<f64>(3, 2).unwrap();
        let b = a.relabeled(&[2, 0, 1]).unwrap();
        let seq = sequential_distribution(&r, &a, &b).unwrap();
        let direct = born_probabilities(&r, &b).unwrap();
        assert!(l1_distance(&seq, &direct).unwrap() < 1e-12);
        assert!(disturbance(&r, &a, &b).unwrap() < 1e-12);
    }

    #[test]
    fn disturbance_examples() {
        let (rho, x, z) = saturation();
        assert!(disturbance(&rho, &x, &x).unwrap() < 1e-15);
        assert!((disturbance(&rho, &x, &z).unwrap() - 1.0).abs() < 1e-15);
        let mixed = DensityMatrix::<f64>::maximally_mixed(3).unwrap();
        for seed in 0..20 {
            let a = random_basis::<f64>(3, seed).unwrap();
            let b = random_basis::<f64>(3, seed + 100).unwrap();
            assert!(disturbance(&mixed, &a, &b).unwrap() < 1e-14);
        }
        let three = ProjectiveMeasurement::<f64>::computational(3).unwrap();
        assert!(disturbance(&rho, &x, &three).is_err());
    }

    #[test]
    fn report_examples() {
        let (rho, x, z) = saturation();
        let rep = balance_report(&rho, &x, &z).unwrap();
        for c in rep.chain {
            assert!((c - 1.0).abs() < 1e-12, "{:?}", rep.chain);
        }
        assert!((rep.ratio.unwrap() - 1.0).abs() < 1e-12);

        let eig = DensityMatrix::<f64>::basis_state(2, 1).unwrap();
        let rep = balance_report(&eig, &z, &x).unwrap();
        for c in rep.chain {
            assert!(c.abs() < 1e-14);
        }
        assert_eq!(rep.ratio, None);
    }

    #[test]
    fn two_routes_agree_and_pair_identity() {
        for seed in 0..300u64 {
            let d = 2 + (seed % 5) as usize;
            let rho = random_state::<f64>(d, seed).unwrap();
            let a = random_basis::<f64>(d, seed + 1_000).unwrap();
            let b = random_basis::<f64>(d, seed + 2_000).unwrap();
            let p = sequential_distribution(&rho, &a, &b).unwrap();
            let q = sequential_distribution_via_transition(&rho, &a, &b).unwrap();
            assert!(l1_distance(&p, &q).unwrap() < 1e-12);

            for i in 0..d {
                for j in (i + 1)..d {
                    let sigma = coherence_pair(&rho, &a, i, j).unwrap();
                    let elem = a.vectors()[i].dotc(&(rho.matrix() * &a.vectors()[j]));
                    let lhs = trace_norm(&sigma).unwrap();
                    assert!((lhs - 2.0 * elem.norm()).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn chain_monotone_small_run() {
        for seed in 0..500u64 {
            let d = 2 + (seed % 5) as usize;
            let rho = random_state::<f64>(d, 3 * seed).unwrap();
            let a = random_basis::<f64>(d, 3 * seed + 1).unwrap();
            let b = random_basis::<f64>(d, 3 * seed + 2).unwrap();
            let rep = balance_report(&rho, &a, &b).unwrap();
            assert!(rep.is_monotone(1e-9), "seed {seed}: {:?}", rep.chain);
            assert!(rep.balance_gap() >= -1e-9);
        }
    }

    #[test]
    fn strength_over_saturation_is_one() {
        let v = balance_strength_over(&[saturation()], 1e-6).unwrap();
        assert!((v - 1.0).abs() < 1e-15, "{v}");
    }

    #[test]
    fn no_informative_sample_is_an_error() {
        let (_, x, z) = saturation();
        let mixed = DensityMatrix::<f64>::maximally_mixed(2).unwrap();
        assert!(matches!(
            balance_strength_over(&[(mixed, x, z)], 1e-6),
            Err(Error::NoData { .. })
        ));
        assert!(estimate_balance_strength::<f64>(2, 0, 0, 1e-6).is_err());
        assert!(estimate_balance_strength::<f64>(2, 10, 0, 0.0).is_err());
        assert!(matches!(
            estimate_balance_strength::<f64>(2, 5, 0, 10.0),
            Err(Error::NoData { .. })
        ));
    }

    #[test]
    fn generators_reproduce_sampler() {
        let g = Generators::<f64>::sample(3, 4, 7);
        let mut rng = rng_for(4, 7);
        let direct = state_from_ginibre(&ginibre::<f64>(3, &mut rng)).unwrap();
        assert_eq!(g.instance().unwrap().0, direct);
    }
}
