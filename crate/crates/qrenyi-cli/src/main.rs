//! Command-line front end: compute divergences on matrix files, run α-sweeps
//! to CSV, and drive the property suites.

mod matrix_file;

use clap::{Parser, Subcommand};
use matrix_file::{format_f64, load_state, LoadError};
use qrenyi::divergence::{
    belavkin_staszewski, geometric_renyi, petz_renyi, sandwiched_renyi, DivergenceError,
    DivergenceValue,
};
use qrenyi::harness::{
    commuting_suite, derivative_suite, dpi_suite, inequality_chain_suite, limit_sweep,
    regularization_suite, subadditivity_suite, SuiteReport,
};
use qrenyi::matrix::ToleranceConfig;
use qrenyi::solver::{kringel, sharp_renyi, DivergenceKind, SolverConfig, SolverError};

#[derive(Parser)]
#[command(
    name = "qrenyi",
    version,
    about = "Quantum Rényi-type divergences: closed forms, sharp/kringel minimizations, sweeps and property suites"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one divergence of ρ relative to σ and print a JSON record
    Divergence {
        /// geometric | petz | sandwiched | bs | sharp | kringel-geometric | kringel-petz | kringel-sandwiched
        #[arg(long)]
        kind: String,
        /// Path to the ρ matrix file (JSON)
        #[arg(long)]
        rho: String,
        /// Path to the σ matrix file (JSON)
        #[arg(long)]
        sigma: String,
        /// Rényi order (required for every kind except bs)
        #[arg(long)]
        alpha: Option<f64>,
        /// Seed for optimizer restarts (recorded in the output when given)
        #[arg(long)]
        seed: Option<u64>,
        /// Override the optimizer iteration budget
        #[arg(long)]
        max_iters: Option<usize>,
        /// Override all numeric tolerances with one value in (0, 1e-3)
        #[arg(long)]
        tol_override: Option<f64>,
    },
    /// Sweep divergences over a descending α list and write a CSV table
    Sweep {
        #[arg(long)]
        rho: String,
        #[arg(long)]
        sigma: String,
        /// Comma-separated α values in (1, 2]
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
        /// Output CSV path
        #[arg(long)]
        out: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        tol_override: Option<f64>,
    },
    /// Run a property suite and print per-trial pass/fail lines
    Suite {
        /// dpi | chain | subadd | commuting | regularization | derivative
        #[arg(long)]
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        tol_override: Option<f64>,
    },
}

/// Failure carrying the exit-code contract: 1 I/O-or-parse, 2 domain,
/// 3 convergence.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn domain(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        let code = match e {
            LoadError::Io { .. } | LoadError::Parse { .. } => 1,
            LoadError::Domain { .. } => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<DivergenceError> for Failure {
    fn from(e: DivergenceError) -> Self {
        let code = match e {
            DivergenceError::Convergence { .. } => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        let code = match &e {
            SolverError::Convergence { .. } | SolverError::GradientCheck { .. } => 3,
            SolverError::Divergence(DivergenceError::Convergence { .. }) => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            std::process::exit(failure.code);
        }
    }
}

fn build_tol(tol_override: Option<f64>) -> Result<ToleranceConfig, Failure> {
    let tol = match tol_override {
        None => ToleranceConfig::default(),
        Some(v) => ToleranceConfig {
            rank_cutoff_rel: v,
            psd_slack: v,
            support_slack: v,
        },
    };
    tol.validate().map_err(|e| Failure::domain(e.to_string()))?;
    Ok(tol)
}

fn build_cfg(seed: Option<u64>, max_iters: Option<usize>) -> SolverConfig {
    let mut cfg = SolverConfig::default();
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(m) = max_iters {
        cfg.max_iters = m;
    }
    cfg
}

fn json_number(x: f64) -> String {
    if x.is_nan() {
        "\"nan\"".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "\"inf\"".into()
        } else {
            "\"-inf\"".into()
        }
    } else {
        serde_json::to_string(&x).expect("finite double serializes")
    }
}

fn run(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Divergence {
            kind,
            rho,
            sigma,
            alpha,
            seed,
            max_iters,
            tol_override,
        } => cmd_divergence(kind, rho, sigma, alpha, seed, max_iters, tol_override),
        Command::Sweep {
            rho,
            sigma,
            alphas,
            out,
            seed,
            max_iters,
            tol_override,
        } => cmd_sweep(rho, sigma, alphas, out, seed, max_iters, tol_override),
        Command::Suite {
            name,
            seed,
            trials,
            max_iters,
            tol_override,
        } => cmd_suite(name, seed, trials, max_iters, tol_override),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_divergence(
    kind: String,
    rho_path: String,
    sigma_path: String,
    alpha: Option<f64>,
    seed: Option<u64>,
    max_iters: Option<usize>,
    tol_override: Option<f64>,
) -> Result<i32, Failure> {
    let tol = build_tol(tol_override)?;
    let cfg = build_cfg(seed, max_iters);
    let rho = load_state(&rho_path, &tol)?;
    let sigma = load_state(&sigma_path, &tol)?;

    let need_alpha = || -> Result<f64, Failure> {
        alpha.ok_or_else(|| Failure::domain(format!("kind '{kind}' requires --alpha")))
    };

    let value: DivergenceValue = match kind.as_str() {
        "geometric" => geometric_renyi(&rho, &sigma, need_alpha()?, &tol)?,
        "petz" => petz_renyi(&rho, &sigma, need_alpha()?, &tol)?,
        "sandwiched" => sandwiched_renyi(&rho, &sigma, need_alpha()?, &tol)?,
        "bs" => belavkin_staszewski(&rho, &sigma, &tol)?,
        "sharp" => sharp_renyi(&rho, &sigma, need_alpha()?, &cfg, &tol)?.0,
        "kringel-geometric" => {
            kringel(DivergenceKind::Geometric, &rho, &sigma, need_alpha()?, &cfg, &tol)?.0
        }
        "kringel-petz" => {
            kringel(DivergenceKind::Petz, &rho, &sigma, need_alpha()?, &cfg, &tol)?.0
        }
        "kringel-sandwiched" => {
            kringel(DivergenceKind::Sandwiched, &rho, &sigma, need_alpha()?, &cfg, &tol)?.0
        }
        other => {
            return Err(Failure::domain(format!(
                "unknown divergence kind '{other}'"
            )))
        }
    };

    let mut fields = vec![
        ("kind", serde_json::to_string(&kind).expect("string")),
        ("alpha", alpha.map_or("null".into(), json_number)),
        ("value", json_number(value.value)),
        (
            "method",
            serde_json::to_string(value.method.as_str()).expect("string"),
        ),
        ("residual", json_number(value.residual)),
    ];
    let seed_text;
    if let Some(s) = seed {
        seed_text = s.to_string();
        fields.push(("seed", seed_text));
    }
    let body: Vec<String> = fields
        .iter()
        .map(|(k, v)| format!("\"{k}\": {v}"))
        .collect();
    println!("{{{}}}", body.join(", "));
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    rho_path: String,
    sigma_path: String,
    mut alphas: Vec<f64>,
    out: String,
    seed: Option<u64>,
    max_iters: Option<usize>,
    tol_override: Option<f64>,
) -> Result<i32, Failure> {
    let tol = build_tol(tol_override)?;
    let cfg = build_cfg(seed, max_iters);
    let rho = load_state(&rho_path, &tol)?;
    let sigma = load_state(&sigma_path, &tol)?;
    if alphas.iter().any(|&a| a <= 1.0 || a > 2.0) {
        return Err(Failure::domain("sweep needs α values in (1, 2]"));
    }
    alphas.sort_by(|a, b| b.total_cmp(a));
    alphas.dedup();

    let sweep = limit_sweep(&rho, &sigma, &alphas, &cfg, &tol)?;

    let mut csv = String::from("alpha,sharp,geometric,sandwiched,petz,kringel_petz\n");
    for r in &sweep.records {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            format_f64(r.alpha),
            format_f64(r.sharp),
            format_f64(r.geometric),
            format_f64(r.sandwiched),
            format_f64(r.petz),
            format_f64(r.kringel_petz),
        ));
    }
    csv.push_str(&format!(
        "limit_extrapolated,{},bs_reference,{}\n",
        format_f64(sweep.extrapolated_limit),
        format_f64(sweep.bs_reference),
    ));
    std::fs::write(&out, csv).map_err(|e| Failure {
        code: 1,
        message: format!("cannot write '{out}': {e}"),
    })?;
    Ok(0)
}

fn cmd_suite(
    name: String,
    seed: u64,
    trials: usize,
    max_iters: Option<usize>,
    tol_override: Option<f64>,
) -> Result<i32, Failure> {
    let tol = build_tol(tol_override)?;
    let cfg = build_cfg(Some(seed), max_iters);
    let report: SuiteReport = match name.as_str() {
        "dpi" => dpi_suite(seed, trials, &cfg, &tol)?,
        "chain" => inequality_chain_suite(seed, trials, &[1.5, 2.0], &cfg, &tol)?,
        "subadd" => subadditivity_suite(seed, trials, &cfg, &tol)?,
        "commuting" => commuting_suite(seed, trials, &cfg, &tol)?,
        "regularization" => regularization_suite(seed, trials, &cfg, &tol)?,
        "derivative" => derivative_suite(seed, trials, &cfg, &tol)?,
        other => return Err(Failure::domain(format!("unknown suite '{other}'"))),
    };

    for trial in 0..report.trials {
        let failures: Vec<_> = report
            .violations
            .iter()
            .filter(|v| v.trial == trial)
            .collect();
        if failures.is_empty() {
            println!("trial {trial}: pass");
        } else {
            for v in failures {
                println!("trial {trial}: FAIL {} (seed {})", v.message, v.seed);
            }
        }
    }
    let failed_trials: std::collections::BTreeSet<usize> =
        report.violations.iter().map(|v| v.trial).collect();
    println!(
        "suite {}: {}/{} trials passed, {} violations in {} checks",
        report.name,
        report.trials - failed_trials.len(),
        report.trials,
        report.violations.len(),
        report.checks
    );
    Ok(if report.passed() { 0 } else { 1 })
}
