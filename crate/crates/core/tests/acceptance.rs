//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};
use std::time::Instant;

use balance_core::bound::{
    alpha_from_nonlocality, f_value, feasible_max_correlator, max_bound, symmetric_bound,
    BoundParams, Branch,
};
use balance_core::boxes::{all_local_deterministic_boxes, chsh, pr_balance_property, pr_box, quantum_box};
use balance_core::cli::figure::SURFACE_ALPHAS;
use balance_core::cli::{self, Command, FigureKind, Format, RunConfig};
use balance_core::quantum::{random_basis_with, random_state_with, rng_for, transition_matrix};
use balance_core::sequential::{balance_report, estimate_balance_strength};
use balance_core::{DensityMatrix, Exact, ProjectiveMeasurement};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_tsirelson() -> Outcome {
    let v = symmetric_bound(1.0).map_err(|e| e.to_string())?;
    let err = (v - 2.0 * SQRT_2).abs();
    ensure(err <= 1e-12, || format!("symmetric_bound(1) = {v}, error {err:e}"))?;
    Ok(format!("symmetric_bound(1) = {v}"))
}

fn c2_unit_strength() -> Outcome {
    let step = 0.001;
    let r = max_bound(1.0f64, step).map_err(|e| e.to_string())?;
    ensure((2.92..=2.94).contains(&r.max_value), || format!("max {}", r.max_value))?;
    let off = (r.argmax_gamma - r.argmax_tau).abs();
    ensure(off <= 2.0 * step, || {
        format!("argmax ({}, {}) off the diagonal by {off}", r.argmax_gamma, r.argmax_tau)
    })?;
    Ok(format!("max {} at ({}, {})", r.max_value, r.argmax_gamma, r.argmax_tau))
}

fn c3_pr_endpoint() -> Outcome {
    let value = chsh(&pr_box::<Exact>());
    ensure(value == Exact::from_integer(4), || format!("exact chsh(pr) = {value}"))?;
    let r = max_bound(0.0f64, 0.01).map_err(|e| e.to_string())?;
    ensure((r.max_value - 4.0).abs() <= 1e-9, || format!("max_bound(0) = {}", r.max_value))?;
    Ok(format!("chsh(pr) = {value}, max_bound(0, 0.01) = {}", r.max_value))
}

fn c4_pr_balance() -> Outcome {
    let expected = (Exact::from_integer(0), Exact::from_integer(2));
    for k in 0..=100 {
        let q = Exact::new(k, 100);
        let got = pr_balance_property(q).map_err(|e| e.to_string())?;
        ensure(got == expected, || format!("q = {q}: got ({}, {})", got.0, got.1))?;
    }
    Ok("(0, 2) exactly for q = 0, 1/100, ..., 1 in rational arithmetic".into())
}

fn c5_chain() -> Outcome {
    let mut detail = Vec::new();
    for dim in [2usize, 3, 4] {
        let mut worst = f64::INFINITY;
        let mut violations = 0;
        for k in 0..10_000u64 {
            let mut rng = rng_for(5_000 + dim as u64, k);
            let rho = random_state_with::<f64>(dim, &mut rng).map_err(|e| e.to_string())?;
            let a = random_basis_with::<f64>(dim, &mut rng).map_err(|e| e.to_string())?;
            let b = random_basis_with::<f64>(dim, &mut rng).map_err(|e| e.to_string())?;
            let s = balance_report(&rho, &a, &b).map_err(|e| e.to_string())?.slack();
            worst = worst.min(s);
            violations += (s < -1e-9) as usize;
        }
        ensure(violations == 0, || format!("d={dim}: {violations} violations, min slack {worst:e}"))?;
        detail.push(format!("d={dim} min slack {worst:.3e}"));
    }
    Ok(detail.join("; "))
}

fn c6_saturation() -> Outcome {
    let rho = DensityMatrix::basis_state(2, 0).map_err(|e| e.to_string())?;
    let r = balance_report(&rho, &ProjectiveMeasurement::sigma_x(), &ProjectiveMeasurement::sigma_z())
        .map_err(|e| e.to_string())?;
    ensure((r.uncertainty - 1.0).abs() <= 1e-12 && (r.disturbance - 1.0).abs() <= 1e-12, || {
        format!("delta = {}, D = {}", r.uncertainty, r.disturbance)
    })?;
    let mut estimates = Vec::new();
    for seed in 0..3u64 {
        let a = estimate_balance_strength::<f64>(2, 10_000, seed, 1e-6).map_err(|e| e.to_string())?;
        ensure((a - 1.0).abs() <= 1e-3, || format!("seed {seed}: estimate {a}"))?;
        estimates.push(a);
    }
    Ok(format!("delta = D = 1; estimates {estimates:?}"))
}

fn c7_unbias() -> Outcome {
    let mut worst = 0.0f64;
    for dim in 2..=6usize {
        for k in 0..1_000u64 {
            let mut rng = rng_for(7_000 + dim as u64, k);
            let a = random_basis_with::<f64>(dim, &mut rng).map_err(|e| e.to_string())?;
            let b = random_basis_with::<f64>(dim, &mut rng).map_err(|e| e.to_string())?;
            let t = transition_matrix(&a, &b).map_err(|e| e.to_string())?;
            for i in 0..dim {
                worst = worst.max((t.row_sum(i) - 1.0).abs()).max((t.column_sum(i) - 1.0).abs());
            }
            ensure(t.is_doubly_stochastic(1e-10), || format!("d={dim} pair {k} not doubly stochastic"))?;
        }
    }
    Ok(format!("5000 pairs, max marginal defect {worst:.1e}"))
}

fn c8_oracle() -> Outcome {
    let res = 1e-3;
    let mut worst = f64::INFINITY;
    for k in 0..1_000u64 {
        let mut rng = rng_for(8_000, k);
        let p = BoundParams::new(
            rng.random_range(0.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
        )
        .map_err(|e| e.to_string())?;
        for branch in [Branch::Plus, Branch::Minus] {
            let oracle = feasible_max_correlator(&p, branch, res).map_err(|e| e.to_string())?;
            let f: f64 = f_value(&p, branch).map_err(|e| e.to_string())?;
            let bound = 2.0 * f.sqrt();
            let slack = bound + 1e-2 - oracle;
            worst = worst.min(slack);
            ensure(slack >= 0.0, || {
                format!("({}, {}, {}) {branch:?}: oracle {oracle} > 2 sqrt f = {bound}", p.alpha, p.gamma, p.tau)
            })?;
        }
    }
    let p = BoundParams::new(1.0, 0.0, 0.0).map_err(|e| e.to_string())?;
    let at_origin = feasible_max_correlator(&p, Branch::Plus, res).map_err(|e| e.to_string())?;
    ensure((at_origin - SQRT_2).abs() <= 2e-3, || format!("oracle(1, 0, 0) = {at_origin}"))?;
    Ok(format!("2000 evaluations, min slack {worst:.3e}; oracle(1, 0, 0) = {at_origin}"))
}

fn c9_quantum_ceiling() -> Outcome {
    let singlet = DensityMatrix::singlet();
    let eq = ProjectiveMeasurement::equatorial;
    let alice = [eq(0.0), eq(FRAC_PI_2)];
    let bob = [eq(FRAC_PI_4), eq(-FRAC_PI_4)];
    let bx = quantum_box(&singlet, [&alice[0], &alice[1]], [&bob[0], &bob[1]]).map_err(|e| e.to_string())?;
    let v = chsh(&bx);
    let relabeled = chsh(&bx.relabel_bob());
    ensure((v.abs() - 2.0 * SQRT_2).abs() <= 1e-10, || format!("singlet chsh = {v}"))?;
    ensure((relabeled - 2.0 * SQRT_2).abs() <= 1e-10, || format!("relabeled chsh = {relabeled}"))?;
    let mut top = f64::NEG_INFINITY;
    for k in 0..1_000u64 {
        let mut rng = rng_for(9_000, k);
        let rho = random_state_with::<f64>(4, &mut rng).map_err(|e| e.to_string())?;
        let m: Vec<_> = (0..4)
            .map(|_| random_basis_with::<f64>(2, &mut rng))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let bx = quantum_box(&rho, [&m[0], &m[1]], [&m[2], &m[3]]).map_err(|e| e.to_string())?;
        let c = chsh(&bx).abs();
        top = top.max(c);
        ensure(c <= 2.0 * SQRT_2 + 1e-9, || format!("configuration {k}: |chsh| = {c}"))?;
    }
    Ok(format!("singlet chsh = {v}, relabeled {relabeled}; random max |chsh| = {top}"))
}

fn c10_local() -> Outcome {
    let boxes = all_local_deterministic_boxes::<Exact>();
    ensure(boxes.len() == 16, || format!("{} boxes", boxes.len()))?;
    let best = boxes.iter().map(chsh).max().expect("non-empty");
    ensure(best == Exact::from_integer(2), || format!("max chsh = {best}"))?;
    Ok(format!("max over 16 deterministic boxes = {best}"))
}

fn figure_config(which: FigureKind, threads: usize, format: Format) -> RunConfig {
    RunConfig {
        command: Command::Figure,
        alpha: None,
        dim: None,
        samples: None,
        seed: 0,
        grid_step: Some(0.01),
        output_path: None,
        format,
        which: Some(which),
        input: None,
        box_file: None,
        d_threshold: None,
        n0: None,
        report_only: false,
        threads: Some(threads),
    }
}

fn c11_figures() -> Outcome {
    let mut detail = Vec::new();
    for which in [FigureKind::Fig1, FigureKind::SmSurfaces] {
        for format in [Format::Csv, Format::Json] {
            let mut renders = Vec::new();
            for threads in [1, 1, 3] {
                let out = cli::run(&figure_config(which, threads, format)).map_err(|e| e.to_string())?;
                let verdict = out.verdict.expect("figures carry a check");
                ensure(verdict.passed, || format!("{which:?}: {}", verdict.detail))?;
                renders.push(out.record.render(format));
            }
            ensure(renders.windows(2).all(|w| w[0] == w[1]), || {
                format!("{which:?} {format:?} output differs between runs")
            })?;
            if format == Format::Csv {
                detail.push(format!("{which:?} {} bytes", renders[0].len()));
            }
        }
        if which == FigureKind::SmSurfaces {
            detail.push(format!("{} panels argmax on diagonal", SURFACE_ALPHAS.len()));
        }
    }
    Ok(detail.join("; "))
}

fn c12_inverse() -> Outcome {
    let mut worst = 0.0f64;
    for k in 1..=101 {
        let alpha = k as f64 / 101.0;
        let back = alpha_from_nonlocality(symmetric_bound(alpha).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        worst = worst.max((back - alpha).abs());
    }
    ensure(worst <= 1e-10, || format!("max round-trip error {worst:e}"))?;
    Ok(format!("max round-trip error {worst:.1e}"))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("Tsirelson recovery", c1_tsirelson),
        ("asymmetric unit-strength bound", c2_unit_strength),
        ("PR-box endpoint", c3_pr_endpoint),
        ("PR-box balance identities", c4_pr_balance),
        ("quantum balance chain", c5_chain),
        ("saturation", c6_saturation),
        ("unbias (doubly stochastic)", c7_unbias),
        ("oracle domination", c8_oracle),
        ("quantum CHSH ceiling", c9_quantum_ceiling),
        ("local bound", c10_local),
        ("figure regression", c11_figures),
        ("inverse consistency", c12_inverse),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
