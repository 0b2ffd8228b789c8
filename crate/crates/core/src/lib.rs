//! Uncertainty–complementarity balance toolkit.
//!
//! * [`prob`]: outcome distributions, uncertainty, L1 distance
//! * [`quantum`]: density matrices, projective measurements, sampling
//! * [`sequential`]: sequential statistics, disturbance, balance chain
//! * [`boxes`]: bipartite no-signaling boxes and the CHSH functional
//! * [`bound`]: closed-form nonlocality bounds and their feasibility oracle
//! * [`cli`]: the `balance` command-line front end
//!
//! The math is generic over the scalar type. Probability tables accept exact
//! rationals; anything involving matrices or irrational roots needs `f32` or
//! `f64`. The aliases below fix the common `f64` instantiation.

pub mod bound;
pub mod boxes;
pub mod cli;
pub mod error;
pub mod prob;
pub mod quantum;
pub mod scalar;
pub mod sequential;

pub use error::{Error, Result};
pub use scalar::{Real, Scalar};

/// Exact rational scalar.
pub type Exact = num_rational::Rational64;

pub type ProbDist = prob::ProbDist<f64>;
pub type ExactProbDist = prob::ProbDist<Exact>;
pub type DensityMatrix = quantum::DensityMatrix<f64>;
pub type ProjectiveMeasurement = quantum::ProjectiveMeasurement<f64>;
pub type TransitionMatrix = quantum::TransitionMatrix<f64>;
pub type BalanceReport = sequential::BalanceReport<f64>;
pub type CorrelationBox = boxes::CorrelationBox<f64>;
pub type ExactBox = boxes::CorrelationBox<Exact>;
pub type BoundParams = bound::BoundParams<f64>;
pub type ScanResult = bound::ScanResult<f64>;
