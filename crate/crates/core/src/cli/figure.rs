//! Data behind the nonlocality-vs-balance-strength curves and the
//! `(gamma, tau)` surfaces of `n`.

use super::record::{Cell, Meta, Record};
use super::{CliError, FigureKind};
use crate::bound::{diagonal_bound, n_surface, symmetric_bound};

/// Panels of the surface figure.
pub const SURFACE_ALPHAS: [f64; 4] = [1.0, 0.75, 0.5, 0.25];

#[derive(Debug, Clone)]
pub struct FigureCheck {
    pub passed: bool,
    pub detail: String,
}

pub fn figure_record(
    which: FigureKind,
    grid_step: f64,
    meta: Meta,
) -> Result<(Record, FigureCheck), CliError> {
    match which {
        FigureKind::Fig1 => fig1(grid_step, meta),
        FigureKind::SmSurfaces => surfaces(grid_step, meta),
    }
}

/// `0, step, 2 step, ...` up to and including 1.
fn alpha_axis(step: f64) -> Vec<f64> {
    let count = ((1.0 + 1e-9 * step) / step).floor() as usize;
    let mut axis: Vec<f64> = (0..=count).map(|k| (k as f64 * step).min(1.0)).collect();
    match axis.last_mut() {
        Some(last) if *last > 1.0 - 1e-12 => *last = 1.0,
        _ => axis.push(1.0),
    }
    axis
}

fn fig1(grid_step: f64, meta: Meta) -> Result<(Record, FigureCheck), CliError> {
    let mut rec = Record {
        meta,
        columns: vec!["alpha", "n_gamma_max", "n_s"],
        rows: Vec::new(),
    };
    let mut bad = Vec::new();
    for alpha in alpha_axis(grid_step) {
        let n_gamma = diagonal_bound(alpha, grid_step)?.max_value;
        let n_s = symmetric_bound(alpha)?;
        if n_gamma < n_s - 1e-12 {
            bad.push(alpha);
        }
        rec.push(vec![Cell::Num(alpha), Cell::Num(n_gamma), Cell::Num(n_s)]);
    }
    let check = FigureCheck {
        passed: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("n_gamma_max >= n_s on all {} rows", rec.rows.len())
        } else {
            format!("n_gamma_max < n_s at alpha {bad:?}")
        },
    };
    Ok((rec, check))
}

fn surfaces(grid_step: f64, meta: Meta) -> Result<(Record, FigureCheck), CliError> {
    let mut rec = Record {
        meta,
        columns: vec!["alpha", "gamma", "tau", "n"],
        rows: Vec::new(),
    };
    let mut notes = Vec::new();
    let mut passed = true;
    for alpha in SURFACE_ALPHAS {
        let surface = n_surface(alpha, grid_step)?;
        let (mut best, mut at) = (f64::NEG_INFINITY, (0.0, 0.0));
        for &(g, t, n) in &surface {
            if n > best {
                best = n;
                at = (g, t);
            }
            rec.push(vec![Cell::Num(alpha), Cell::Num(g), Cell::Num(t), Cell::Num(n)]);
        }
        let on_diagonal = (at.0 - at.1).abs() <= grid_step + 1e-12;
        passed &= on_diagonal;
        notes.push(format!("alpha={alpha}: max {best} at ({}, {})", at.0, at.1));
    }
    Ok((
        rec,
        FigureCheck {
            passed,
            detail: notes.join("; "),
        },
    ))
}
