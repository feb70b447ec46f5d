//! Quantitative check orchestration: α→1 limit sweeps with Richardson
//! extrapolation, the derivative identity at α = 1, the inequality chain
//! D̃ ≤ D°_Petz ≤ D# ≤ D̂, data-processing and subadditivity suites, the
//! commuting collapse, and the tensor-power regularization trend.

use crate::channel::{derive_seed, random_channel, random_state, ChannelError};
use crate::divergence::{
    belavkin_staszewski, classical_renyi, geometric_renyi, geometric_trace_fn_dalpha, petz_renyi,
    sandwiched_renyi, State,
};
use crate::matrix::{supp_contained, ToleranceConfig};
use crate::solver::{kringel, sharp_renyi, sharp_trace_fn, DivergenceKind, SolverConfig, SolverError};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One α-point of a limit sweep; all values on the divergence (log) scale.
#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub alpha: f64,
    pub sharp: f64,
    pub geometric: f64,
    pub sandwiched: f64,
    pub petz: f64,
    pub kringel_petz: f64,
    pub converged: bool,
}

/// Sweep of divergences over α descending toward 1, with the Richardson
/// limit of the sharp column and the Belavkin-Staszewski reference value.
#[derive(Debug, Clone)]
pub struct AlphaSweep {
    pub records: Vec<SweepRecord>,
    pub extrapolated_limit: f64,
    pub bs_reference: f64,
    pub partial: bool,
}

impl AlphaSweep {
    pub fn alphas(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.alpha).collect()
    }

    /// Richardson limit of an arbitrary column, e.g. the geometric one.
    pub fn extrapolate(&self, column: impl Fn(&SweepRecord) -> f64) -> f64 {
        let alphas = self.alphas();
        let values: Vec<f64> = self.records.iter().map(column).collect();
        richardson_extrapolate(&alphas, &values)
    }
}

/// Polynomial extrapolation to α = 1 through the last three points of a
/// sequence sampled at descending α (Lagrange at h = 0 for h = α − 1).
/// Falls back to linear extrapolation (or the last value) for short inputs.
pub fn richardson_extrapolate(alphas: &[f64], values: &[f64]) -> f64 {
    assert_eq!(alphas.len(), values.len(), "column length mismatch");
    let n = alphas.len();
    let take = n.min(3);
    if take == 0 {
        return f64::NAN;
    }
    let hs: Vec<f64> = alphas[n - take..].iter().map(|a| a - 1.0).collect();
    let ys = &values[n - take..];
    let mut out = 0.0;
    for i in 0..take {
        let mut weight = 1.0;
        for j in 0..take {
            if j != i {
                weight *= hs[j] / (hs[j] - hs[i]);
            }
        }
        out += weight * ys[i];
    }
    out
}

/// Computes D#, D̂, D̃, D_Petz and D°_Petz at each α of a descending list in
/// (1, 2], extrapolates D# toward α = 1, and attaches the
/// Belavkin-Staszewski reference.
pub fn limit_sweep(
    rho: &State,
    sigma: &State,
    alphas: &[f64],
    cfg: &SolverConfig,
    tol: &ToleranceConfig,
) -> Result<AlphaSweep, SolverError> {
    if alphas.is_empty() {
        return Err(SolverError::Domain("empty α list".into()));
    }
    for w in alphas.windows(2) {
        if w[1] >= w[0] {
            return Err(SolverError::Domain(
                "α list must be strictly decreasing".into(),
            ));
        }
    }
    if alphas.iter().any(|&a| a <= 1.0 || a > 2.0) {
        return Err(SolverError::Domain("sweep needs α ⊂ (1, 2]".into()));
    }
    if !supp_contained(rho.op(), sigma.op(), tol)? {
        return Err(SolverError::Domain(
            "limit sweep needs supp(ρ) ⊆ supp(σ)".into(),
        ));
    }
    let mut records = Vec::with_capacity(alphas.len());
    let mut partial = false;
    for &alpha in alphas {
        let (sharp, sharp_report) = sharp_renyi(rho, sigma, alpha, cfg, tol)?;
        let (kringel_petz, petz_report) =
            kringel(DivergenceKind::Petz, rho, sigma, alpha, cfg, tol)?;
        let converged = sharp_report.converged && petz_report.converged;
        partial |= !converged;
        records.push(SweepRecord {
            alpha,
            sharp: sharp.value,
            geometric: geometric_renyi(rho, sigma, alpha, tol)?.value,
            sandwiched: sandwiched_renyi(rho, sigma, alpha, tol)?.value,
            petz: petz_renyi(rho, sigma, alpha, tol)?.value,
            kringel_petz: kringel_petz.value,
            converged,
        });
    }
    let alphas_vec: Vec<f64> = records.iter().map(|r| r.alpha).collect();
    let sharp_vec: Vec<f64> = records.iter().map(|r| r.sharp).collect();
    let extrapolated_limit = richardson_extrapolate(&alphas_vec, &sharp_vec);
    let bs_reference = belavkin_staszewski(rho, sigma, tol)?.value;
    Ok(AlphaSweep {
        records,
        extrapolated_limit,
        bs_reference,
        partial,
    })
}

/// Forward-difference slopes of Q#_α at α = 1 (with Q#_1 := Tr ρ) against
/// the analytic derivative of the geometric trace function.
#[derive(Debug, Clone, Copy)]
pub struct DerivativeCheck {
    /// slope at h = 1e-2
    pub fd_slope_coarse: f64,
    /// slope at h = 1e-3
    pub fd_slope_fine: f64,
    /// d/dα Q̂_α(ρ‖σ) at α = 1
    pub analytic: f64,
}

impl DerivativeCheck {
    /// Each slope must agree with the analytic derivative within 50·h.
    pub fn passes(&self) -> bool {
        (self.fd_slope_coarse - self.analytic).abs() <= 50.0 * 1e-2
            && (self.fd_slope_fine - self.analytic).abs() <= 50.0 * 1e-3
    }

    /// The (finite-difference, analytic) pair at the finer step.
    pub fn as_pair(&self) -> (f64, f64) {
        (self.fd_slope_fine, self.analytic)
    }
}

/// One-sided derivative identity at α = 1: the slope of the sharp trace
/// function matches the α-derivative of the geometric trace function.
pub fn derivative_identity_check(
    rho: &State,
    sigma: &State,
    cfg: &SolverConfig,
    tol: &ToleranceConfig,
) -> Result<DerivativeCheck, SolverError> {
    if !supp_contained(rho.op(), sigma.op(), tol)? {
        return Err(SolverError::Domain(
            "derivative check needs supp(ρ) ⊆ supp(σ)".into(),
        ));
    }
    let q1 = rho.trace();
    let mut slopes = [0.0; 2];
    for (i, h) in [1e-2, 1e-3].into_iter().enumerate() {
        let (q, _) = sharp_trace_fn(rho, sigma, 1.0 + h, cfg, tol)?;
        slopes[i] = (q - q1) / h;
    }
    let analytic = geometric_trace_fn_dalpha(rho, sigma, 1.0, tol)?;
    Ok(DerivativeCheck {
        fd_slope_coarse: slopes[0],
        fd_slope_fine: slopes[1],
        analytic,
    })
}

/// A failed comparison inside a suite, with enough context to replay it.
#[derive(Debug, Clone)]
pub struct Violation {
    pub trial: usize,
    pub seed: u64,
    pub message: String,
}

/// Outcome of one property suite. Inequality violations are entries, not
/// errors; solver failures abort the suite as errors.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: String,
    pub trials: usize,
    pub checks: usize,
    pub violations: Vec<Violation>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Seeded (ρ, σ) pair with full-rank σ (and full-rank ρ), both density.
pub fn random_pair(dim: usize, seed: u64) -> Result<(State, State), ChannelError> {
    let rho = random_state(dim, dim, derive_seed(seed, 0))?;
    let sigma = random_state(dim, dim, derive_seed(seed, 1))?;
    Ok((rho, sigma))
}

fn channel_err(e: ChannelError) -> SolverError {
    SolverError::Domain(e.to_string())
}

/// Inequality chain D̃_α − tol ≤ D°_Petz ≤ D#_α + tol ≤ D̂_α + 2·tol over
/// seeded random pairs in dims {2, 3}, tol = 1e-5.
pub fn inequality_chain_suite(
    seed: u64,
    trials: usize,
    alphas: &[f64],
    cfg: &SolverConfig,
    tol: &ToleranceConfig,
) -> Result<SuiteReport, SolverError> {
    const CHAIN_TOL: f64 = 1e-5;
    let mut report = SuiteReport {
        name: "chain".into(),
        trials,
        checks: 0,
        violations: Vec::new(),
    };
    for trial in 0..trials {
        for dim in [2usize, 3] {
            let pair_seed = derive_seed(seed, (trial * 2 + dim) as u64);
            let (rho, sigma) = random_pair(dim, pair_seed).map_err(channel_err)?;
            for &alpha in alphas {
                let sandwiched = sandwiched_renyi(&rho, &sigma, alpha, tol)?.value;
                let (kringel_petz, _) =
                    kringel(DivergenceKind::Petz, &rho, &sigma, alpha, cfg, tol)?;
                let (sharp, _) = sharp_renyi(&rho, &sigma, alpha, cfg, tol)?;
                let geometric = geometric_renyi(&rho, &sigma, alpha, tol)?.value;
                report.checks += 3;
                let mut fail = |msg: String| {
                    report.violations.push(Violation {
                        trial,
                        seed: pair_seed,
                        message: msg,
                    });
                };
                if kringel_petz.value < sandwiched - CHAIN_TOL {
                    fail(format!(
                        "dim {dim} α {alpha}: D°_Petz {} < sandwiched {}",
                        kringel_petz.value, sandwiched
                    ));
                }
                if kringel_petz.value > sharp.value + CHAIN_TOL {
                    fail(format!(
                        "dim {dim} α {alpha}: D°_Petz {} > sharp {}",
                        kringel_petz.value, sharp.value
                    ));
                }
                if sharp.value > geometric + CHAIN_TOL {
                    fail(format!(
                        "dim {dim} α {alpha}: sharp {} > geometric {geometric}",
                        sharp.value
                    ));
                }
            }
        }
    }
    Ok(report)
}

/// Data-processing under seeded random channels: the sharp divergence at
/// α ∈ {1.5, 2, 2.5, 3} and the geometric divergence at α ∈ {1.5, 2} may not
/// increase by more than 1e-5.
pub fn dpi_suite(
    seed: u64,
    trials: usize,
    cfg: &SolverConfig,
    tol: &ToleranceConfig,
) -> Result<SuiteReport, SolverError> {
    const DPI_TOL: f64 = 1e-5;
    const SHARP_ALPHAS: [f64; 4] = [1.5, 2.0, 2.5, 3.0];
    const GEOMETRIC_ALPHAS: [f64; 2] = [1.5, 2.0];
    let mut report = SuiteReport {
        name: "dpi".into(),
        trials,
        checks: 0,
        violations: Vec::new(),
    };
    for trial in 0..trials {
        for dim in [2usize, 3] {
            let trial_seed = derive_seed(seed, (trial * 2 + dim) as u64);
            let (rho, sigma) = random_pair(dim, trial_seed).map_err(channel_err)?;
            let channel =
                random_channel(dim, dim, dim, derive_seed(trial_seed, 2)).map_err(channel_err)?;
            let rho_out = channel.apply_state(&rho, tol).map_err(channel_err)?;
            let sigma_out = channel.apply_state(&sigma, tol).map_err(channel_err)?;
            for &alpha in &SHARP_ALPHAS {
                let (before, _) = sharp_renyi(&rho, &sigma, alpha, cfg, tol)?;
                let (after, _) = sharp_renyi(&rho_out, &sigma_out, alpha, cfg, tol)?;
                report.checks += 1;
                if after.value > before.value + DPI_TOL {
                    report.violations.push(Violation {
                        trial,
                        seed: trial_seed,
                        message: format!(
                            "sharp dim {dim} α {alpha}: {} → {} increases",
                            before.value, after.value
                        ),
                    });
                }
            }
            for &alpha in &GEOMETRIC_ALPHAS {
                let before = geometric_renyi(&rho, &sigma, alpha, tol)?.value;
                let after = geometric_renyi(&rho_out, &sigma_out, alpha, tol)?.value;
                report.checks += 1;
                if after > before + DPI_TOL {
                    report.violations.push(Violation {
                        trial,
                        seed: trial_seed,
                        message: format!(
                            "geometric dim {dim} α {alpha}: {before} → {after} increases"
                        ),
                    });
                }
            }
        }
    }
    Ok(report)
}

/// Subadditivity of the Petz kringel on qubit tensor pairs at α = 2:
/// D°(ρ₁⊗ρ₂‖σ₁⊗σ₂) ≤ D°(ρ₁‖σ₁) + D°(ρ₂‖σ₂) + 1e-5.
pub fn subadditivity_suite(
    seed: u64,
    trials: usize,
    cfg: &SolverConfig,
    tol: &ToleranceConfig,
) -> Result<SuiteReport, SolverError> {
    const SUB_TOL: f64 = 1e-5;
    const ALPHA: f64 = 2.0;
    let mut report = SuiteReport {
        name: "subadd".into(),
        trials,
        checks: 0,
        violations: Vec::new(),
    };
    for trial in 0..trials {
        let trial_seed = derive_seed(seed, trial as u64);
        let (rho1, sigma1) = random_pair(2, derive_seed(trial_seed, 10)).map_err(channel_err)?;
        let (rho2, sigma2) = random_pair(2, derive_seed(trial_seed, 11)).map_err(channel_err)?;
        let (joint, _) = kringel(
            DivergenceKind::Petz,
            &rho1.kron(&rho2),
            &sigma1.kron(&sigma2),
            ALPHA,
            cfg,
            tol,
        )?;
        let (left, _) = kringel(DivergenceKind::Petz, &rho1, &sigma1, ALPHA, cfg, tol)?;
        let (right, _) = kringel(DivergenceKind::Petz, &rho2, &sigma2, ALPHA, cfg, tol)?;
        report.checks += 1;
        if joint.value > left.value + right.value + SUB_TOL {
            report.violations.push(Violation {
                trial,
                seed: trial_seed,
                message: format!(
                    "tensor value {} exceeds {} + {}",
                    joint.value, left.value, right.value
                ),
            });
        }
    }
    Ok(report)
}

/// Commuting collapse: on seeded diagonal pairs (dims 2–4) every implemented
/// divergence equals the classical Rényi divergence within 1e-6 at
/// α ∈ {1.5, 2, 3}.
pub fn commuting_suite(
    seed: u64,
    trials: usize,
    cfg: &SolverConfig,
    tol: &ToleranceConfig,
) -> Result<SuiteReport, SolverError> {
    const COMMUTING_TOL: f64 = 1e-6;
    const ALPHAS: [f64; 3] = [1.5, 2.0, 3.0];
    let mut report = SuiteReport {
        name: "commuting".into(),
        trials,
        checks: 0,
        violations: Vec::new(),
    };
    for trial in 0..trials {
        let trial_seed = derive_seed(seed, trial as u64);
        let dim = 2 + trial % 3;
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
        let p = random_simplex_point(&mut rng, dim);
        let q = random_simplex_point(&mut rng, dim);
        let rho = State::from_diagonal(&p, tol)?;
        let sigma = State::from_diagonal(&q, tol)?;
        for &alpha in &ALPHAS {
            let classical = classical_renyi(&p, &q, alpha)?;
            let (sharp, _) = sharp_renyi(&rho, &sigma, alpha, cfg, tol)?;
            let (kringel_petz, _) = kringel(DivergenceKind::Petz, &rho, &sigma, alpha, cfg, tol)?;
            let candidates = [
                ("geometric", geometric_renyi(&rho, &sigma, alpha, tol)?.value),
                ("petz", petz_renyi(&rho, &sigma, alpha, tol)?.value),
                (
                    "sandwiched",
                    sandwiched_renyi(&rho, &sigma, alpha, tol)?.value,
                ),
                ("sharp", sharp.value),
                ("kringel-petz", kringel_petz.value),
            ];
            for (name, value) in candidates {
                report.checks += 1;
                if (value - classical).abs() > COMMUTING_TOL {
                    report.violations.push(Violation {
                        trial,
                        seed: trial_seed,
                        message: format!(
                            "{name} dim {dim} α {alpha}: {value} vs classical {classical}"
                        ),
                    });
                }
            }
        }
    }
    Ok(report)
}

/// Strictly positive probability vector, bounded away from the boundary so
/// diagonal instances stay well-conditioned.
fn random_simplex_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..dim).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Tensor-power trend (1/n)·D°_Petz(ρ^⊗n‖σ^⊗n) for n = 1..N with the
/// sandwiched divergence as floor. N is capped so dim^N ≤ 16.
#[derive(Debug, Clone)]
pub struct RegularizationRun {
    pub values: Vec<f64>,
    pub target: f64,
}

impl RegularizationRun {
    pub fn monotone_within(&self, slack: f64) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0] + slack)
    }

    pub fn respects_floor(&self, slack: f64) -> bool {
        self.values.iter().all(|&v| v >= self.target - slack)
    }
}

/// Computes the regularization trend of the Petz kringel toward the
/// sandwiched divergence. Asymptotic equality is out of reach at these n and
/// is deliberately not part of the contract.
pub fn regularization_trend(
    rho: &State,
    sigma: &State,
    alpha: f64,
    cfg: &SolverConfig,
    tol: &ToleranceConfig,
) -> Result<RegularizationRun, SolverError> {
    if !supp_contained(rho.op(), sigma.op(), tol)? {
        return Err(SolverError::Domain(
            "regularization trend needs supp(ρ) ⊆ supp(σ)".into(),
        ));
    }
    let mut values = Vec::new();
    let mut rho_n = rho.clone();
    let mut sigma_n = sigma.clone();
    for n in 1..=3usize {
        if rho_n.dim() > 16 {
            break;
        }
        let (v, _) = kringel(DivergenceKind::Petz, &rho_n, &sigma_n, alpha, cfg, tol)?;
        values.push(v.value / n as f64);
        rho_n = rho_n.kron(rho);
        sigma_n = sigma_n.kron(sigma);
    }
    let target = sandwiched_renyi(rho, sigma, alpha, tol)?.value;
    Ok(RegularizationRun { values, target })
}

/// Regularization suite over seeded qubit pairs at α = 2: the per-n sequence
/// must be non-increasing within 1e-5 and respect the sandwiched floor.
pub fn regularization_suite(
    seed: u64,
    trials: usize,
    cfg: &SolverConfig,
    tol: &ToleranceConfig,
) -> Result<SuiteReport, SolverError> {
    const REG_TOL: f64 = 1e-5;
    let mut report = SuiteReport {
        name: "regularization".into(),
        trials,
        checks: 0,
        violations: Vec::new(),
    };
    for trial in 0..trials {
        let trial_seed = derive_seed(seed, trial as u64);
        let (rho, sigma) = random_pair(2, trial_seed).map_err(channel_err)?;
        let run = regularization_trend(&rho, &sigma, 2.0, cfg, tol)?;
        report.checks += 2;
        if !run.monotone_within(REG_TOL) {
            report.violations.push(Violation {
                trial,
                seed: trial_seed,
                message: format!("sequence {:?} is not non-increasing", run.values),
            });
        }
        if !run.respects_floor(REG_TOL) {
            report.violations.push(Violation {
                trial,
                seed: trial_seed,
                message: format!("sequence {:?} dips below floor {}", run.values, run.target),
            });
        }
    }
    Ok(report)
}

/// Derivative-identity suite over seeded pairs in dims {2, 3}.
pub fn derivative_suite(
    seed: u64,
    trials: usize,
    cfg: &SolverConfig,
    tol: &ToleranceConfig,
) -> Result<SuiteReport, SolverError> {
    let mut report = SuiteReport {
        name: "derivative".into(),
        trials,
        checks: 0,
        violations: Vec::new(),
    };
    for trial in 0..trials {
        let trial_seed = derive_seed(seed, trial as u64);
        let dim = 2 + trial % 2;
        let (rho, sigma) = random_pair(dim, trial_seed).map_err(channel_err)?;
        let check = derivative_identity_check(&rho, &sigma, cfg, tol)?;
        report.checks += 1;
        if !check.passes() {
            report.violations.push(Violation {
                trial,
                seed: trial_seed,
                message: format!(
                    "dim {dim}: slopes ({}, {}) vs analytic {}",
                    check.fd_slope_coarse, check.fd_slope_fine, check.analytic
                ),
            });
        }
    }
    Ok(report)
}
