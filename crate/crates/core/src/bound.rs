//! Closed-form CHSH upper bounds as functions of the balance strength.
//!
//! With balance strength `alpha` and transition parameters `gamma`, `tau`,
//! each of Alice's conditional states obeys
//!
//! `sqrt(1 - A_mu^2) >= alpha |A_mu + gamma_mu A_mubar|`, `gamma_0 = gamma`, `gamma_1 = tau`.
//!
//! Squaring both constraints in `a = A_0 + A_1`, `b = A_0 - A_1` and
//! cancelling the `ab` cross terms gives `4 >= a^2/f(+) + b^2/f(-)`, hence
//! `|A_0 +- A_1| <= 2 sqrt(f(alpha, +-gamma, +-tau))` and
//! `CHSH <= n = 2 sqrt(f(+)) + 2 sqrt(f(-))`.
//!
//! [`f_value`] carries the cross-term coefficients exactly as they come out of
//! the expansion, `alpha^2 (1 - g^2) + 1`. [`published_f_value`] is the
//! printed variant with `alpha^2 (g^2 - 1) + 1`; both agree whenever
//! `gamma = tau`, which is where every maximum lies, but only the former is
//! dominated by [`feasible_max_correlator`] off the diagonal.

use num_traits::Float;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Guard radius in `(gamma, tau)` around the removable singularity of the
/// printed form at `alpha = 1`.
pub const SINGULAR_GUARD: f64 = 1e-8;
/// Pattern search stops once its step drops below this.
pub const REFINE_MIN_STEP: f64 = 1e-8;
pub const DEFAULT_GRID_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundParams<T> {
    pub alpha: T,
    pub gamma: T,
    pub tau: T,
}

impl<T: Real> BoundParams<T> {
    pub fn new(alpha: T, gamma: T, tau: T) -> Result<Self> {
        check_alpha(alpha)?;
        for (name, v) in [("gamma", gamma), ("tau", tau)] {
            if !(v >= -T::one() && v <= T::one()) {
                return Err(invalid(format!("{name} must lie in [-1, 1], got {v}")));
            }
        }
        Ok(Self { alpha, gamma, tau })
    }

    fn signed(&self, branch: Branch) -> (T, T) {
        match branch {
            Branch::Plus => (self.gamma, self.tau),
            Branch::Minus => (-self.gamma, -self.tau),
        }
    }
}

/// Which of `|A_0 + A_1|` / `|A_0 - A_1|` is bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Branch::Plus => T::one(),
            Branch::Minus => -T::one(),
        }
    }
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if alpha >= T::zero() && alpha <= T::one() {
        Ok(())
    } else {
        Err(invalid(format!("alpha must lie in [0, 1], got {alpha}")))
    }
}

fn check_step<T: Real>(step: T) -> Result<()> {
    if step > T::zero() && step <= T::lit(0.1) {
        Ok(())
    } else {
        Err(invalid(format!("grid step must lie in (0, 0.1], got {step}")))
    }
}

/// `f(alpha, s gamma, s tau)` from the sign-consistent elimination.
///
/// Every factor is at least 1 on the domain, so the value lies in `(0, 1]`
/// and there is no singular point.
pub fn f_value<T: Real>(params: &BoundParams<T>, branch: Branch) -> Result<T> {
    let (g, t) = params.signed(branch);
    let a2 = params.alpha * params.alpha;
    let one = T::one();
    let cg = a2 * (one - g * g) + one;
    let ct = a2 * (one - t * t) + one;
    let lead_g = a2 * (one + g) * (one + g) + one;
    let lead_t = a2 * (one + t) * (one + t) + one;
    Ok((cg + ct) / (lead_g * ct + lead_t * cg))
}

/// The printed closed form
/// `[a2 (t^2 + g^2 - 2) + 2] / [(a2 (1+g)^2 + 1)(a2 (t^2-1) + 1) + (a2 (1+t)^2 + 1)(a2 (g^2-1) + 1)]`.
///
/// At `alpha = 1, gamma = tau = 0` both numerator and denominator vanish; the
/// limit is `1/2` from every direction and is returned inside
/// [`SINGULAR_GUARD`]. Factors are regrouped as `a2 x^2 + (1 - a2)` so the
/// evaluation stays accurate just outside the guard.
pub fn published_f_value<T: Real>(params: &BoundParams<T>, branch: Branch) -> Result<T> {
    let (g, t) = params.signed(branch);
    let one = T::one();
    let guard = T::lit(SINGULAR_GUARD);
    if params.alpha >= one - guard && g * g + t * t <= guard * guard {
        return Ok(T::lit(0.5));
    }
    let a2 = params.alpha * params.alpha;
    let slack = (one - params.alpha) * (one + params.alpha);
    let cg = a2 * g * g + slack;
    let ct = a2 * t * t + slack;
    let lead_g = a2 * (one + g) * (one + g) + one;
    let lead_t = a2 * (one + t) * (one + t) + one;
    let num = cg + ct;
    let den = lead_g * ct + lead_t * cg;
    let near_locus = params.alpha >= one - guard && g * g + t * t <= T::lit(1e-6);
    if Float::abs(den) < T::lit(1e-12) && !near_locus {
        return Err(Error::Singular {
            alpha: params.alpha.to_f64().unwrap_or(f64::NAN),
            gamma: g.to_f64().unwrap_or(f64::NAN),
            tau: t.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(num / den)
}

/// `n = 2 sqrt(f(alpha, gamma, tau)) + 2 sqrt(f(alpha, -gamma, -tau))`.
pub fn n_value<T: Real>(params: &BoundParams<T>) -> Result<T> {
    let two = T::lit(2.0);
    Ok(two * Float::sqrt(f_value(params, Branch::Plus)?)
        + two * Float::sqrt(f_value(params, Branch::Minus)?))
}

pub fn published_n_value<T: Real>(params: &BoundParams<T>) -> Result<T> {
    let two = T::lit(2.0);
    Ok(two * Float::sqrt(published_f_value(params, Branch::Plus)?)
        + two * Float::sqrt(published_f_value(params, Branch::Minus)?))
}

/// `n` on the diagonal `gamma = tau`:
/// `2/sqrt(a2 (1+g)^2 + 1) + 2/sqrt(a2 (1-g)^2 + 1)`.
pub fn diagonal_n<T: Real>(alpha: T, gamma: T) -> Result<T> {
    n_value(&BoundParams::new(alpha, gamma, gamma)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanResult<T> {
    pub max_value: T,
    pub argmax_gamma: T,
    pub argmax_tau: T,
    pub grid_step: T,
    pub refined: bool,
}

/// Grid points `-1, -1 + step, ...` ending exactly at `1`.
pub fn grid_axis<T: Real>(step: T) -> Vec<T> {
    let one = T::one();
    let count = Float::floor((T::lit(2.0) + T::lit(1e-9) * step) / step)
        .to_usize()
        .expect("bounded grid");
    let mut axis: Vec<T> = (0..=count)
        .map(|k| -one + T::from_usize(k).expect("small") * step)
        .map(|x| Float::min(x, one))
        .collect();
    if *axis.last().expect("non-empty") < one - T::lit(1e-12) {
        axis.push(one);
    } else {
        *axis.last_mut().expect("non-empty") = one;
    }
    axis
}

/// Maximizes `objective` over a box, starting from `start`, by compass search
/// with shrinking step (8 directions, halving on failure).
fn pattern_search<T: Real, const N: usize>(
    objective: impl Fn([T; N]) -> T,
    start: [T; N],
    mut value: T,
    mut step: T,
) -> ([T; N], T) {
    let one = T::one();
    let min_step = T::lit(REFINE_MIN_STEP);
    let mut x = start;
    let dirs: Vec<[T; N]> = {
        let mut dirs = Vec::new();
        let choices = [-one, T::zero(), one];
        let total = 3usize.pow(N as u32);
        for code in 0..total {
            let mut d = [T::zero(); N];
            let mut c = code;
            for slot in d.iter_mut() {
                *slot = choices[c % 3];
                c /= 3;
            }
            if d.iter().any(|v| *v != T::zero()) {
                dirs.push(d);
            }
        }
        dirs
    };
    while step >= min_step {
        let mut best = None;
        for d in &dirs {
            let mut cand = x;
            for (c, dv) in cand.iter_mut().zip(d) {
                *c = Float::max(-one, Float::min(one, *c + *dv * step));
            }
            let v = objective(cand);
            if v > best.map_or(value, |(_, bv)| bv) {
                best = Some((cand, v));
            }
        }
        match best {
            Some((cand, v)) => {
                x = cand;
                value = v;
            }
            None => step = step * T::lit(0.5),
        }
    }
    (x, value)
}

/// `max_{gamma, tau} n` by grid search followed by pattern-search refinement.
pub fn max_bound<T: Real>(alpha: T, grid_step: T) -> Result<ScanResult<T>> {
    check_alpha(alpha)?;
    check_step(grid_step)?;
    let axis = grid_axis(grid_step);
    let row_best = |i: usize| -> Result<(T, usize, usize)> {
        let mut best = (T::neg_infinity(), i, 0);
        for (j, &t) in axis.iter().enumerate() {
            let v = n_value(&BoundParams::new(alpha, axis[i], t)?)?;
            if v > best.0 {
                best = (v, i, j);
            }
        }
        Ok(best)
    };
    let rows: Vec<(T, usize, usize)> = (0..axis.len())
        .into_par_iter()
        .map(row_best)
        .collect::<Result<_>>()?;
    // Strict comparison keeps the first maximum in index order.
    let (grid_max, bi, bj) = rows
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("non-empty grid");

    let objective = |p: [T; 2]| {
        BoundParams::new(alpha, p[0], p[1])
            .and_then(|bp| n_value(&bp))
            .unwrap_or(T::neg_infinity())
    };
    let ([g, t], v) = pattern_search(objective, [axis[bi], axis[bj]], grid_max, grid_step);
    Ok(ScanResult {
        max_value: v,
        argmax_gamma: g,
        argmax_tau: t,
        grid_step,
        refined: true,
    })
}

/// `max_gamma n(gamma, gamma)` with the same protocol as [`max_bound`].
pub fn diagonal_bound<T: Real>(alpha: T, grid_step: T) -> Result<ScanResult<T>> {
    check_alpha(alpha)?;
    check_step(grid_step)?;
    let axis = grid_axis(grid_step);
    let mut best = (T::neg_infinity(), 0usize);
    for (i, &g) in axis.iter().enumerate() {
        let v = diagonal_n(alpha, g)?;
        if v > best.0 {
            best = (v, i);
        }
    }
    let objective = |p: [T; 1]| diagonal_n(alpha, p[0]).unwrap_or(T::neg_infinity());
    let ([g], v) = pattern_search(objective, [axis[best.1]], best.0, grid_step);
    Ok(ScanResult {
        max_value: v,
        argmax_gamma: g,
        argmax_tau: g,
        grid_step,
        refined: true,
    })
}

/// `4 / sqrt(alpha^2 + 1)`, the bound at `gamma = tau = 0`.
pub fn symmetric_bound<T: Real>(alpha: T) -> Result<T> {
    check_alpha(alpha)?;
    Ok(T::lit(4.0) * Float::sqrt(T::one() / (alpha * alpha + T::one())))
}

/// `sqrt(16 - n0^2) / n0`: largest balance strength compatible with an
/// observed CHSH value `n0` under the symmetric bound.
pub fn alpha_from_nonlocality<T: Real>(n0: T) -> Result<T> {
    if !(n0 > T::zero() && n0 <= T::lit(4.0)) {
        return Err(invalid(format!("n0 must lie in (0, 4], got {n0}")));
    }
    Ok(Float::sqrt(T::lit(16.0) - n0 * n0) / n0)
}

/// Brute-force maximum of `|A_0 + s A_1|` over the grid on `[-1, 1]^2`
/// subject to the two raw per-measurement balance constraints.
pub fn feasible_max_correlator<T: Real>(
    params: &BoundParams<T>,
    branch: Branch,
    resolution: T,
) -> Result<T> {
    if !(resolution > T::zero() && resolution <= T::lit(0.01)) {
        return Err(invalid(format!("resolution must lie in (0, 0.01], got {resolution}")));
    }
    let axis = grid_axis(resolution);
    let roots: Vec<T> = axis
        .iter()
        .map(|&x| Float::sqrt(Float::max(T::one() - x * x, T::zero())))
        .collect();
    let (alpha, gamma, tau) = (params.alpha, params.gamma, params.tau);
    let s = branch.sign::<T>();
    let best = (0..axis.len())
        .into_par_iter()
        .with_min_len(64)
        .map(|i| {
            let (x0, r0) = (axis[i], roots[i]);
            let mut best = T::zero();
            for (&x1, &r1) in axis.iter().zip(&roots) {
                let v = Float::abs(x0 + s * x1);
                if v <= best {
                    continue;
                }
                if r0 >= alpha * Float::abs(x0 + gamma * x1)
                    && r1 >= alpha * Float::abs(x1 + tau * x0)
                {
                    best = v;
                }
            }
            best
        })
        .reduce(T::zero, Float::max);
    Ok(best)
}

/// `(gamma, tau, n)` over the full grid, row-major in `gamma`.
pub fn n_surface<T: Real>(alpha: T, grid_step: T) -> Result<Vec<(T, T, T)>> {
    check_alpha(alpha)?;
    check_step(grid_step)?;
    let axis = grid_axis(grid_step);
    let mut out = Vec::with_capacity(axis.len() * axis.len());
    for &g in &axis {
        for &t in &axis {
            out.push((g, t, n_value(&BoundParams::new(alpha, g, t)?)?));
        }
    }
    Ok(out)
}
