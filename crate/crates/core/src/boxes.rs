//! Two-party, two-setting, two-outcome correlation boxes.
//!
//! A box is the table `p(a, b | mu, nu)`, stored and serialized in the index
//! order `[mu][nu][a][b]`. Construction enforces normalization and
//! no-signaling, so every `CorrelationBox` value is a valid no-signaling box.

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, invalid, Result};
use crate::prob::{l1_distance, uncertainty, ProbDist};
use crate::quantum::{DensityMatrix, ProjectiveMeasurement, TransitionMatrix};
use crate::scalar::{Real, Scalar};

pub type Table<T> = [[[[T; 2]; 2]; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationBox<T> {
    table: Table<T>,
}

/// Worst-case no-signaling violation on each side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignalingResiduals<T> {
    /// `max |p(a|mu, nu=0) - p(a|mu, nu=1)|`.
    pub alice: T,
    /// `max |p(b|mu=0, nu) - p(b|mu=1, nu)|`.
    pub bob: T,
    /// `max |sum_ab p(a,b|mu,nu) - 1|`.
    pub normalization: T,
}

fn sign<T: Scalar>(a: usize, b: usize, mu: usize, nu: usize) -> T {
    if (a + b + mu * nu).is_multiple_of(2) {
        T::one()
    } else {
        -T::one()
    }
}

pub fn residuals<T: Scalar>(table: &Table<T>) -> SignalingResiduals<T> {
    let mut out = SignalingResiduals {
        alice: T::zero(),
        bob: T::zero(),
        normalization: T::zero(),
    };
    let bump = |slot: &mut T, v: T| {
        if v.abs() > *slot {
            *slot = v.abs();
        }
    };
    for mu in 0..2 {
        for nu in 0..2 {
            let t = &table[mu][nu];
            bump(&mut out.normalization, t[0][0] + t[0][1] + t[1][0] + t[1][1] - T::one());
        }
    }
    for x in 0..2 {
        for o in 0..2 {
            let alice_marg = |nu: usize| table[x][nu][o][0] + table[x][nu][o][1];
            bump(&mut out.alice, alice_marg(0) - alice_marg(1));
            let bob_marg = |mu: usize| table[mu][x][0][o] + table[mu][x][1][o];
            bump(&mut out.bob, bob_marg(0) - bob_marg(1));
        }
    }
    out
}

impl<T: Scalar> CorrelationBox<T> {
    pub fn new(table: Table<T>) -> Result<Self> {
        let tol = T::prob_tolerance();
        for row in table.iter().flatten().flatten() {
            for &p in row {
                if p < T::zero() || p > T::one() {
                    return Err(invalid(format!("box entry {p} outside [0, 1]")));
                }
            }
        }
        let r = residuals(&table);
        if r.normalization > tol {
            return Err(invalid(format!("box is not normalized (residual {})", r.normalization)));
        }
        if r.alice > tol || r.bob > tol {
            return Err(invalid(format!(
                "box is signaling (alice residual {}, bob residual {})",
                r.alice, r.bob
            )));
        }
        Ok(Self { table })
    }

    pub fn table(&self) -> &Table<T> {
        &self.table
    }

    pub fn get(&self, a: usize, b: usize, mu: usize, nu: usize) -> T {
        self.table[mu][nu][a][b]
    }

    pub fn residuals(&self) -> SignalingResiduals<T> {
        residuals(&self.table)
    }

    /// Uniform table, `p = 1/4` everywhere.
    pub fn white_noise() -> Self {
        let q = T::one() / T::from_u8(4).expect("small");
        Self::new([[[[q; 2]; 2]; 2]; 2]).expect("white noise is valid")
    }

    /// Swaps Bob's outcome labels in every setting.
    pub fn relabel_bob(&self) -> Self {
        let mut t = self.table;
        for row in t.iter_mut().flatten().flatten() {
            row.swap(0, 1);
        }
        Self { table: t }
    }

    /// Product of independent local statistics: `alice[mu]`, `bob[nu]` are
    /// the outcome distributions of each setting.
    pub fn product(alice: [&ProbDist<T>; 2], bob: [&ProbDist<T>; 2]) -> Result<Self> {
        for d in alice.iter().chain(bob.iter()) {
            check_dims(2, d.len())?;
        }
        let mut t = [[[[T::zero(); 2]; 2]; 2]; 2];
        for mu in 0..2 {
            for nu in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        t[mu][nu][a][b] = alice[mu].get(a) * bob[nu].get(b);
                    }
                }
            }
        }
        Self::new(t)
    }

    /// Alice's marginal for setting `mu` (setting-independent on Bob's side).
    pub fn alice_marginal(&self, mu: usize) -> Result<ProbDist<T>> {
        let t = &self.table[mu][0];
        ProbDist::new(vec![t[0][0] + t[0][1], t[1][0] + t[1][1]])
    }

    pub fn bob_marginal(&self, nu: usize) -> Result<ProbDist<T>> {
        let t = &self.table[0][nu];
        ProbDist::new(vec![t[0][0] + t[1][0], t[0][1] + t[1][1]])
    }
}

/// `p(a,b|mu,nu) = (1 + (-1)^(a+b+mu nu)) / 4`.
pub fn pr_box<T: Scalar>() -> CorrelationBox<T> {
    let mut t = [[[[T::zero(); 2]; 2]; 2]; 2];
    let half = T::one() / T::from_u8(2).expect("small");
    for (mu, by_nu) in t.iter_mut().enumerate() {
        for (nu, by_a) in by_nu.iter_mut().enumerate() {
            for (a, by_b) in by_a.iter_mut().enumerate() {
                for (b, p) in by_b.iter_mut().enumerate() {
                    if (a + b + mu * nu) % 2 == 0 {
                        *p = half;
                    }
                }
            }
        }
    }
    CorrelationBox::new(t).expect("PR box is a valid no-signaling box")
}

/// Deterministic local strategy: Alice answers `alice[mu]`, Bob `bob[nu]`.
pub fn local_deterministic_box<T: Scalar>(alice: [bool; 2], bob: [bool; 2]) -> CorrelationBox<T> {
    let mut t = [[[[T::zero(); 2]; 2]; 2]; 2];
    for mu in 0..2 {
        for nu in 0..2 {
            t[mu][nu][alice[mu] as usize][bob[nu] as usize] = T::one();
        }
    }
    CorrelationBox::new(t).expect("deterministic boxes are local")
}

/// All 16 deterministic local boxes, indexed by the bits `a0 a1 b0 b1`.
pub fn all_local_deterministic_boxes<T: Scalar>() -> Vec<CorrelationBox<T>> {
    (0u8..16)
        .map(|k| {
            let bit = |i: u8| k >> (3 - i) & 1 == 1;
            local_deterministic_box([bit(0), bit(1)], [bit(2), bit(3)])
        })
        .collect()
}

/// `p(a,b|mu,nu) = Tr[rho (P_a|A_mu (x) P_b|B_nu)]` on a two-qubit state.
pub fn quantum_box<T: Real>(
    state: &DensityMatrix<T>,
    alice: [&ProjectiveMeasurement<T>; 2],
    bob: [&ProjectiveMeasurement<T>; 2],
) -> Result<CorrelationBox<T>> {
    for m in alice.iter().chain(bob.iter()) {
        // Two-outcome rank-1 measurements live on qubits.
        check_dims(2, m.dim())?;
    }
    check_dims(4, state.dim())?;
    let rho = state.matrix();
    let mut t = [[[[T::zero(); 2]; 2]; 2]; 2];
    for mu in 0..2 {
        for nu in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let v = alice[mu].vectors()[a].kronecker(&bob[nu].vectors()[b]);
                    let p = (v.adjoint() * rho * &v)[(0, 0)].re;
                    // Clip roundoff that strays outside [0, 1].
                    t[mu][nu][a][b] = num_traits::clamp(p, T::zero(), T::one());
                }
            }
        }
    }
    CorrelationBox::new(t)
}

/// `sum (-1)^(a+b+mu nu) p(a,b|mu,nu)`.
pub fn chsh<T: Scalar>(bx: &CorrelationBox<T>) -> T {
    let mut s = T::zero();
    for mu in 0..2 {
        for nu in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    s = s + sign::<T>(a, b, mu, nu) * bx.table[mu][nu][a][b];
                }
            }
        }
    }
    s
}

/// Alice's side after Bob measured `B_nu` and saw `outcome`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalState<T> {
    pub outcome: usize,
    /// `p(b | B_nu)`.
    pub weight: T,
    /// `p(a | A_mu, S_{b|nu})` for `mu = 0, 1`; `None` when the weight is zero.
    pub alice: Option<[ProbDist<T>; 2]>,
}

impl<T: Scalar> ConditionalState<T> {
    pub fn is_available(&self) -> bool {
        self.alice.is_some()
    }
}

/// Conditional states for both of Bob's outcomes under setting `bob_setting`.
pub fn conditional_states<T: Scalar>(
    bx: &CorrelationBox<T>,
    bob_setting: usize,
) -> Result<Vec<ConditionalState<T>>> {
    if bob_setting > 1 {
        return Err(invalid(format!("bob setting must be 0 or 1, got {bob_setting}")));
    }
    let nu = bob_setting;
    (0..2)
        .map(|b| {
            let weight = bx.table[0][nu][0][b] + bx.table[0][nu][1][b];
            let alice = if weight > T::zero() {
                let cond = |mu: usize| {
                    let t = &bx.table[mu][nu];
                    ProbDist::new(vec![t[0][b] / weight, t[1][b] / weight])
                };
                Some([cond(0)?, cond(1)?])
            } else {
                None
            };
            Ok(ConditionalState { outcome: b, weight, alice })
        })
        .collect()
}

/// Sums of uncertainty and disturbance over the PR box's conditional states
/// `omega_{0|B_0}` and `omega_{0|B_1}`.
///
/// `q` is the unknown `P(0 | A_1, S_{0|A_0})`; the post-measurement
/// statistics of `A_1` are completed by the unbias assumption.
pub fn pr_balance_property<T: Scalar>(q: T) -> Result<(T, T)> {
    pr_balance_terms(q, 0)
}

/// Same sums for Bob's outcome `bob_outcome`, with
/// `q = P(bob_outcome | A_1, S_{bob_outcome|A_0})`.
pub fn pr_balance_terms<T: Scalar>(q: T, bob_outcome: usize) -> Result<(T, T)> {
    if q < T::zero() || q > T::one() {
        return Err(invalid(format!("q must lie in [0, 1], got {q}")));
    }
    if bob_outcome > 1 {
        return Err(invalid("bob outcome must be 0 or 1"));
    }
    let b = bob_outcome;
    // Column mu: statistics of A_1 after outcome mu of A_0.
    let mut t = vec![T::zero(); 4];
    let other = T::one() - q;
    // Rows i = A_1 outcome. Column b carries q on outcome b.
    for mu in 0..2 {
        for i in 0..2 {
            let hit = if mu == b { i == b } else { i != b };
            t[i * 2 + mu] = if hit { q } else { other };
        }
    }
    let transitions = TransitionMatrix::new(2, 2, t)?;

    let pr = pr_box::<T>();
    let mut sum_u = T::zero();
    let mut sum_d = T::zero();
    for nu in 0..2 {
        let states = conditional_states(&pr, nu)?;
        let omega = states[b]
            .alice
            .as_ref()
            .ok_or_else(|| invalid("PR conditional state has zero weight"))?;
        let [a0, a1] = omega;
        sum_u = sum_u + uncertainty(a0)?;
        let sequential = transitions.apply(a0)?;
        sum_d = sum_d + l1_distance(a1, &sequential)?;
    }
    Ok((sum_u, sum_d))
}

/// Serialized box: `{"table": [mu][nu][a][b]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxFile {
    pub table: Table<f64>,
}

impl CorrelationBox<f64> {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: BoxFile = serde_json::from_str(text)?;
        Self::new(file.table)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&BoxFile { table: self.table }).expect("plain numbers")
    }
}
