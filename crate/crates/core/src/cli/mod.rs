//! `balance` command-line front end.
//!
//! Every subcommand resolves to a [`RunConfig`] (flags over an optional JSON
//! config file over defaults), runs one library operation and emits a
//! [`Record`] as CSV or JSON. Exit codes: 0 success, 1 I/O failure, 2 usage
//! error, 3 data error, 4 verification failure.

pub mod figure;
pub mod record;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bound::{
    alpha_from_nonlocality, f_value, feasible_max_correlator, max_bound, published_f_value,
    symmetric_bound, BoundParams, Branch, DEFAULT_GRID_STEP,
};
use crate::boxes::{chsh, pr_balance_property, pr_box, CorrelationBox};
use crate::quantum::{random_basis_with, random_state_with, rng_for};
use crate::sequential::{
    balance_report, estimate_balance_strength_detailed, DEFAULT_DISTURBANCE_THRESHOLD,
};
use crate::Exact;
use record::{write_atomic, Meta, Record};

pub const TOOL: &str = "balance";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Slack allowed on chain monotonicity and the balance relation in `verify-qm`.
pub const CHAIN_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_ORACLE_SAMPLES: usize = 100;
pub const DEFAULT_FIGURE_STEP: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyQm,
    EstimateAlpha,
    ScanBound,
    SymmetricBound,
    PrBox,
    OracleCheck,
    Figure,
    BoxEval,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyQm => "verify-qm",
            Command::EstimateAlpha => "estimate-alpha",
            Command::ScanBound => "scan-bound",
            Command::SymmetricBound => "symmetric-bound",
            Command::PrBox => "pr-box",
            Command::OracleCheck => "oracle-check",
            Command::Figure => "figure",
            Command::BoxEval => "box-eval",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FigureKind {
    Fig1,
    SmSurfaces,
}

/// Fully resolved configuration of one run. Echoed into every artifact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub alpha: Option<f64>,
    pub dim: Option<usize>,
    pub samples: Option<usize>,
    pub seed: u64,
    pub grid_step: Option<f64>,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub which: Option<FigureKind>,
    pub input: Option<PathBuf>,
    pub box_file: Option<PathBuf>,
    pub d_threshold: Option<f64>,
    pub n0: Option<f64>,
    pub report_only: bool,
    /// Worker count; results do not depend on it, so it is not echoed.
    #[serde(skip)]
    pub threads: Option<usize>,
}

/// Optional settings from a `--config` file or the command line.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub command: Option<Command>,
    pub alpha: Option<f64>,
    pub dim: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub grid_step: Option<f64>,
    pub output_path: Option<PathBuf>,
    pub format: Option<Format>,
    pub which: Option<FigureKind>,
    pub input: Option<PathBuf>,
    pub box_file: Option<PathBuf>,
    pub d_threshold: Option<f64>,
    pub n0: Option<f64>,
    pub report_only: Option<bool>,
    pub threads: Option<usize>,
}

impl PartialConfig {
    /// Fields set in `self` win over `base`.
    fn over(self, base: PartialConfig) -> PartialConfig {
        PartialConfig {
            command: self.command.or(base.command),
            alpha: self.alpha.or(base.alpha),
            dim: self.dim.or(base.dim),
            samples: self.samples.or(base.samples),
            seed: self.seed.or(base.seed),
            grid_step: self.grid_step.or(base.grid_step),
            output_path: self.output_path.or(base.output_path),
            format: self.format.or(base.format),
            which: self.which.or(base.which),
            input: self.input.or(base.input),
            box_file: self.box_file.or(base.box_file),
            d_threshold: self.d_threshold.or(base.d_threshold),
            n0: self.n0.or(base.n0),
            report_only: self.report_only.or(base.report_only),
            threads: self.threads.or(base.threads),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Io,
    Usage,
    Data,
    Verification,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Io => 1,
            ErrorKind::Usage => 2,
            ErrorKind::Data => 3,
            ErrorKind::Verification => 4,
        }
    }

    fn label(self) -> &'static str {
        match self {
            ErrorKind::Io => "io",
            ErrorKind::Usage => "usage",
            ErrorKind::Data => "data",
            ErrorKind::Verification => "verification-failed",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Usage, message: msg.into() }
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Data, message: msg.into() }
    }

    pub fn io(msg: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Io, message: msg.into() }
    }

    /// Single-line JSON error record for stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": {
                "kind": self.kind.label(),
                "exit_code": self.kind.exit_code(),
                "message": self.message,
            }
        })
        .to_string()
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.kind.label(), self.message)
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::Io(e) => CliError::io(e.to_string()),
            other => CliError::data(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "balance", version, about = "Balance-relation verification and CHSH bound toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// RNG seed recorded in every artifact.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the artifact here (atomically) instead of stdout.
    #[arg(long, visible_alias = "output")]
    pub output_path: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON file with defaults for any flag; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads (output is identical for any value).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Report verification failures as warnings and exit 0.
    #[arg(long)]
    pub report_only: bool,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Monte Carlo check of the quantum balance relation and its proof chain.
    VerifyQm {
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Upper estimate of the quantum balance strength.
    EstimateAlpha {
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        /// Minimum disturbance for a sample to count.
        #[arg(long)]
        d_threshold: Option<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Maximize the CHSH bound n over (gamma, tau).
    ScanBound {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        grid_step: Option<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Symmetric bound 4/sqrt(alpha^2+1), or its inverse with --n0.
    SymmetricBound {
        #[arg(long, conflicts_with = "n0")]
        alpha: Option<f64>,
        /// Observed CHSH value; reports the largest compatible balance strength.
        #[arg(long)]
        n0: Option<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// PR box CHSH value and balance-strength identities.
    PrBox {
        /// Also write the PR box table as a box file.
        #[arg(long)]
        box_file: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compare the brute-force feasible correlator with the closed form.
    OracleCheck {
        #[arg(long)]
        samples: Option<usize>,
        /// Oracle grid resolution.
        #[arg(long)]
        grid_step: Option<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Emit figure data.
    Figure {
        #[arg(long, value_enum)]
        which: Option<FigureKind>,
        #[arg(long)]
        grid_step: Option<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Evaluate CHSH and no-signaling residuals of a box file.
    BoxEval {
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn partial_from_common(command: Command, c: CommonArgs) -> (PartialConfig, Option<PathBuf>) {
    (
        PartialConfig {
            command: Some(command),
            seed: c.seed,
            output_path: c.output_path,
            format: c.format,
            threads: c.threads,
            report_only: c.report_only.then_some(true),
            ..Default::default()
        },
        c.config,
    )
}

impl Sub {
    fn into_partial(self) -> (PartialConfig, Option<PathBuf>) {
        match self {
            Sub::VerifyQm { dim, samples, common } => {
                let (p, cfg) = partial_from_common(Command::VerifyQm, common);
                (PartialConfig { dim, samples, ..p }, cfg)
            }
            Sub::EstimateAlpha { dim, samples, d_threshold, common } => {
                let (p, cfg) = partial_from_common(Command::EstimateAlpha, common);
                (PartialConfig { dim, samples, d_threshold, ..p }, cfg)
            }
            Sub::ScanBound { alpha, grid_step, common } => {
                let (p, cfg) = partial_from_common(Command::ScanBound, common);
                (PartialConfig { alpha, grid_step, ..p }, cfg)
            }
            Sub::SymmetricBound { alpha, n0, common } => {
                let (p, cfg) = partial_from_common(Command::SymmetricBound, common);
                (PartialConfig { alpha, n0, ..p }, cfg)
            }
            Sub::PrBox { box_file, common } => {
                let (p, cfg) = partial_from_common(Command::PrBox, common);
                (PartialConfig { box_file, ..p }, cfg)
            }
            Sub::OracleCheck { samples, grid_step, common } => {
                let (p, cfg) = partial_from_common(Command::OracleCheck, common);
                (PartialConfig { samples, grid_step, ..p }, cfg)
            }
            Sub::Figure { which, grid_step, common } => {
                let (p, cfg) = partial_from_common(Command::Figure, common);
                (PartialConfig { which, grid_step, ..p }, cfg)
            }
            Sub::BoxEval { input, common } => {
                let (p, cfg) = partial_from_common(Command::BoxEval, common);
                (PartialConfig { input, ..p }, cfg)
            }
        }
    }
}

fn read_config_file(path: &Path) -> Result<PartialConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("config file {}: {e}", path.display())))
}

/// Merges flags over the optional config file and fills defaults.
pub fn resolve(sub: Sub) -> Result<RunConfig, CliError> {
    let (flags, config_path) = sub.into_partial();
    let command = flags.command.expect("subcommand sets the command");
    let merged = match config_path {
        Some(path) => {
            let file = read_config_file(&path)?;
            if let Some(c) = file.command {
                if c != command {
                    return Err(CliError::usage(format!(
                        "config file is for '{}', not '{}'",
                        c.name(),
                        command.name()
                    )));
                }
            }
            flags.over(file)
        }
        None => flags,
    };
    let cfg = RunConfig {
        command,
        alpha: merged.alpha,
        dim: merged.dim,
        samples: merged.samples,
        seed: merged.seed.unwrap_or(0),
        grid_step: merged.grid_step,
        output_path: merged.output_path,
        format: merged.format.unwrap_or_default(),
        which: merged.which,
        input: merged.input,
        box_file: merged.box_file,
        d_threshold: merged.d_threshold,
        n0: merged.n0,
        report_only: merged.report_only.unwrap_or(false),
        threads: merged.threads,
    };
    check_required(&cfg)?;
    Ok(cfg)
}

fn check_required(cfg: &RunConfig) -> Result<(), CliError> {
    let missing = |flag: &str| {
        Err(CliError::usage(format!(
            "'{}' requires --{flag}",
            cfg.command.name()
        )))
    };
    match cfg.command {
        Command::VerifyQm if cfg.dim.is_none() => missing("dim"),
        Command::ScanBound if cfg.alpha.is_none() => missing("alpha"),
        Command::SymmetricBound if cfg.alpha.is_none() && cfg.n0.is_none() => missing("alpha"),
        Command::SymmetricBound if cfg.alpha.is_some() && cfg.n0.is_some() => Err(
            CliError::usage("'symmetric-bound' takes either --alpha or --n0, not both"),
        ),
        Command::Figure if cfg.which.is_none() => missing("which"),
        Command::BoxEval if cfg.input.is_none() => missing("input"),
        _ => Ok(()),
    }
}

/// Result of one run: the artifact plus, for verification commands, the verdict.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub record: Record,
    pub verdict: Option<Verdict>,
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub passed: bool,
    pub detail: String,
}

fn meta(cfg: &RunConfig) -> Meta {
    Meta {
        tool: TOOL,
        version: VERSION,
        command: cfg.command.name().to_string(),
        seed: cfg.seed,
        config: serde_json::to_value(cfg).expect("plain config"),
    }
}

fn record(cfg: &RunConfig, columns: Vec<&'static str>) -> Record {
    Record { meta: meta(cfg), columns, rows: Vec::new() }
}

/// Runs the library operation selected by `cfg`.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    match cfg.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| CliError::usage(format!("thread pool: {e}")))?;
            pool.install(|| dispatch(cfg))
        }
        None => dispatch(cfg),
    }
}

fn dispatch(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    match cfg.command {
        Command::VerifyQm => verify_qm(cfg),
        Command::EstimateAlpha => estimate_alpha(cfg),
        Command::ScanBound => scan_bound(cfg),
        Command::SymmetricBound => symmetric(cfg),
        Command::PrBox => pr_box_cmd(cfg),
        Command::OracleCheck => oracle_check(cfg),
        Command::Figure => figure_cmd(cfg),
        Command::BoxEval => box_eval(cfg),
    }
}

fn samples_of(cfg: &RunConfig, default: usize) -> Result<usize, CliError> {
    match cfg.samples.unwrap_or(default) {
        0 => Err(CliError::data("--samples must be at least 1")),
        n => Ok(n),
    }
}

fn verify_qm(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let dim = cfg.dim.expect("checked");
    let samples = samples_of(cfg, DEFAULT_SAMPLES)?;
    crate::quantum::DensityMatrix::<f64>::maximally_mixed(dim)?;
    let seed = cfg.seed;
    let reports = (0..samples as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_for(seed, k);
            let rho = random_state_with::<f64>(dim, &mut rng)?;
            let a = random_basis_with::<f64>(dim, &mut rng)?;
            let b = random_basis_with::<f64>(dim, &mut rng)?;
            balance_report(&rho, &a, &b)
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let mut min_slack = f64::INFINITY;
    let mut min_gap = f64::INFINITY;
    let mut min_ratio = f64::INFINITY;
    let mut violations = 0usize;
    for r in &reports {
        min_slack = min_slack.min(r.slack());
        min_gap = min_gap.min(r.balance_gap());
        if let Some(q) = r.ratio {
            min_ratio = min_ratio.min(q);
        }
        if r.slack() < -CHAIN_TOLERANCE || r.balance_gap() < -CHAIN_TOLERANCE {
            violations += 1;
        }
    }
    let passed = violations == 0;
    let mut rec = record(
        cfg,
        vec!["dim", "samples", "seed", "min_chain_slack", "min_balance_gap", "min_ratio", "violations", "passed"],
    );
    rec.push(vec![
        dim.into(),
        samples.into(),
        seed.into(),
        min_slack.into(),
        min_gap.into(),
        min_ratio.into(),
        violations.into(),
        passed.into(),
    ]);
    Ok(RunOutcome {
        record: rec,
        verdict: Some(Verdict {
            passed,
            detail: format!("{violations} of {samples} samples violate the chain (min slack {min_slack:e})"),
        }),
    })
}

fn estimate_alpha(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let dim = cfg.dim.unwrap_or(2);
    let samples = samples_of(cfg, DEFAULT_SAMPLES)?;
    let threshold = cfg.d_threshold.unwrap_or(DEFAULT_DISTURBANCE_THRESHOLD);
    let est = estimate_balance_strength_detailed::<f64>(dim, samples, cfg.seed, threshold, true)?;
    let mut rec = record(
        cfg,
        vec![
            "dim",
            "samples",
            "seed",
            "d_threshold",
            "alpha_upper_bound",
            "sampled_min",
            "informative_samples",
            "best_sample",
            "refinement_sweeps",
        ],
    );
    rec.push(vec![
        dim.into(),
        samples.into(),
        cfg.seed.into(),
        threshold.into(),
        est.upper_bound.into(),
        est.sampled_min.into(),
        est.informative_samples.into(),
        est.best_sample.into(),
        est.refinement_sweeps.into(),
    ]);
    Ok(RunOutcome { record: rec, verdict: None })
}

fn scan_bound(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let alpha = cfg.alpha.expect("checked");
    let step = cfg.grid_step.unwrap_or(DEFAULT_GRID_STEP);
    let r = max_bound(alpha, step)?;
    let mut rec = record(cfg, vec!["alpha", "grid_step", "max", "argmax_gamma", "argmax_tau", "refined"]);
    rec.push(vec![
        alpha.into(),
        step.into(),
        r.max_value.into(),
        r.argmax_gamma.into(),
        r.argmax_tau.into(),
        r.refined.into(),
    ]);
    Ok(RunOutcome { record: rec, verdict: None })
}

fn symmetric(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let rec = match (cfg.alpha, cfg.n0) {
        (Some(alpha), _) => {
            let mut rec = record(cfg, vec!["alpha", "symmetric_bound"]);
            rec.push(vec![alpha.into(), symmetric_bound(alpha)?.into()]);
            rec
        }
        (None, Some(n0)) => {
            let mut rec = record(cfg, vec!["n0", "alpha_upper_bound"]);
            rec.push(vec![n0.into(), alpha_from_nonlocality(n0)?.into()]);
            rec
        }
        (None, None) => unreachable!("checked"),
    };
    Ok(RunOutcome { record: rec, verdict: None })
}

/// Number of `q` values in `[0, 1]` checked by `pr-box`.
pub const PR_Q_POINTS: i64 = 101;

fn pr_box_cmd(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let pr = pr_box::<f64>();
    let value = chsh(&pr_box::<Exact>());
    let zero = Exact::from_integer(0);
    let two = Exact::from_integer(2);
    let mut max_u = zero;
    let (mut min_d, mut max_d) = (two, two);
    let mut exact = true;
    for k in 0..PR_Q_POINTS {
        let (u, d) = pr_balance_property(Exact::new(k, PR_Q_POINTS - 1))?;
        exact &= u == zero && d == two;
        max_u = max_u.max(u);
        min_d = min_d.min(d);
        max_d = max_d.max(d);
    }
    let to_f = |q: Exact| *q.numer() as f64 / *q.denom() as f64;
    let residual = pr.residuals();
    let mut rec = record(cfg, vec!["quantity", "value"]);
    for (name, v) in [
        ("chsh", to_f(value)),
        ("alice_signaling_residual", residual.alice),
        ("bob_signaling_residual", residual.bob),
        ("q_points", PR_Q_POINTS as f64),
        ("max_sum_uncertainty", to_f(max_u)),
        ("min_sum_disturbance", to_f(min_d)),
        ("max_sum_disturbance", to_f(max_d)),
        ("alpha_pr", to_f(max_u / min_d)),
    ] {
        rec.push(vec![name.into(), v.into()]);
    }
    if let Some(path) = &cfg.box_file {
        write_atomic(path, &(pr.to_json() + "\n"))?;
    }
    let passed = exact && value == Exact::from_integer(4);
    Ok(RunOutcome {
        record: rec,
        verdict: Some(Verdict {
            passed,
            detail: format!("chsh {value}, balance sums exact (0, 2): {exact}"),
        }),
    })
}

fn oracle_check(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let samples = samples_of(cfg, DEFAULT_ORACLE_SAMPLES)?;
    let resolution = cfg.grid_step.unwrap_or(DEFAULT_GRID_STEP);
    let margin = 10.0 * resolution;
    let mut rec = record(
        cfg,
        vec!["index", "alpha", "gamma", "tau", "branch", "oracle", "bound", "published_bound", "slack"],
    );
    let mut worst = f64::INFINITY;
    let mut failures = 0usize;
    let mut published_failures = 0usize;
    for k in 0..samples as u64 {
        let mut rng = rng_for(cfg.seed, k);
        let params = BoundParams::new(
            rng.random_range(0.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
        )?;
        for (branch, label) in [(Branch::Plus, "+"), (Branch::Minus, "-")] {
            let oracle = feasible_max_correlator(&params, branch, resolution)?;
            let bound = 2.0 * f_value(&params, branch)?.sqrt();
            let published = 2.0 * published_f_value(&params, branch)?.sqrt();
            let slack = bound + margin - oracle;
            worst = worst.min(slack);
            failures += (slack < 0.0) as usize;
            published_failures += (oracle > published + margin) as usize;
            rec.push(vec![
                k.into(),
                params.alpha.into(),
                params.gamma.into(),
                params.tau.into(),
                label.into(),
                oracle.into(),
                bound.into(),
                published.into(),
                slack.into(),
            ]);
        }
    }
    Ok(RunOutcome {
        record: rec,
        verdict: Some(Verdict {
            passed: failures == 0,
            detail: format!(
                "{failures} oracle values exceed 2*sqrt(f) + {margin}; min slack {worst:e}; \
                 printed form exceeded {published_failures} times"
            ),
        }),
    })
}

fn figure_cmd(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let which = cfg.which.expect("checked");
    let step = cfg.grid_step.unwrap_or(DEFAULT_FIGURE_STEP);
    if !(step > 0.0 && step <= 0.1) {
        return Err(CliError::data(format!("grid step must lie in (0, 0.1], got {step}")));
    }
    let (rec, check) = figure::figure_record(which, step, meta(cfg))?;
    Ok(RunOutcome {
        record: rec,
        verdict: Some(Verdict { passed: check.passed, detail: check.detail }),
    })
}

fn box_eval(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let path = cfg.input.as_ref().expect("checked");
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    let bx = CorrelationBox::from_json(&text)?;
    let r = bx.residuals();
    let mut rec = record(
        cfg,
        vec!["chsh", "alice_signaling_residual", "bob_signaling_residual", "normalization_residual"],
    );
    rec.push(vec![chsh(&bx).into(), r.alice.into(), r.bob.into(), r.normalization.into()]);
    Ok(RunOutcome { record: rec, verdict: None })
}

/// Runs a resolved config, writes its artifact, returns the exit code.
pub fn execute(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let outcome = match run(cfg) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.to_json());
            return e.kind.exit_code();
        }
    };
    let text = outcome.record.render(cfg.format);
    let written = match &cfg.output_path {
        Some(path) => write_atomic(path, &text).map(|_| {
            let _ = writeln!(stderr, "wrote {}", path.display());
        }),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(e.to_string())),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "{}", e.to_json());
        return e.kind.exit_code();
    }
    match outcome.verdict {
        Some(v) if !v.passed => {
            let err = CliError { kind: ErrorKind::Verification, message: v.detail };
            if cfg.report_only {
                let _ = writeln!(stderr, "warning: {}", err.message);
                0
            } else {
                let _ = writeln!(stderr, "{}", err.to_json());
                err.kind.exit_code()
            }
        }
        _ => 0,
    }
}

/// Entry point used by the binary: parses `args` and runs.
pub fn main_with_args<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let _ = write!(stderr, "{e}");
            let _ = writeln!(stderr, "{}", CliError::usage(e.kind().to_string()).to_json());
            return ErrorKind::Usage.exit_code();
        }
    };
    match resolve(cli.command) {
        Ok(cfg) => execute(&cfg, stdout, stderr),
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.to_json());
            e.kind.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with_args(
            std::iter::once("balance").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn symmetric_bound_prints_tsirelson() {
        let (code, out, _) = run_args(&["symmetric-bound", "--alpha", "1"]);
        assert_eq!(code, 0);
        assert!(out.lines().any(|l| l == "1.0,2.8284271247461903"), "{out}");
    }

    #[test]
    fn inverse_via_n0() {
        let (code, out, _) = run_args(&["symmetric-bound", "--n0", "4"]);
        assert_eq!(code, 0);
        assert!(out.contains("4.0,0.0"));
    }

    #[test]
    fn usage_and_data_errors() {
        assert_eq!(run_args(&["scan-bound"]).0, 2);
        assert_eq!(run_args(&["no-such-command"]).0, 2);
        assert_eq!(run_args(&["scan-bound", "--alpha", "x"]).0, 2);
        let (code, _, err) = run_args(&["symmetric-bound", "--alpha", "2"]);
        assert_eq!(code, 3);
        assert!(err.contains("\"kind\":\"data\""));
        assert_eq!(run_args(&["verify-qm", "--dim", "9", "--samples", "3"]).0, 3);
        assert_eq!(run_args(&["--help"]).0, 0);
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"alpha": 0.0, "seed": 9, "format": "json"}"#).unwrap();
        let p = path.to_str().unwrap();
        let (code, out, _) = run_args(&["symmetric-bound", "--config", p, "--alpha", "1"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["meta"]["seed"], 9);
        assert_eq!(v["meta"]["config"]["alpha"], 1.0);
        assert_eq!(v["data"]["rows"][0][1], 2.0 * 2f64.sqrt());

        std::fs::write(&path, r#"{"command": "pr-box"}"#).unwrap();
        assert_eq!(run_args(&["symmetric-bound", "--config", p, "--alpha", "1"]).0, 2);
        std::fs::write(&path, r#"{"bogus": 1}"#).unwrap();
        assert_eq!(run_args(&["symmetric-bound", "--config", p, "--alpha", "1"]).0, 2);
    }
}
