//! Property suites for the spec-level invariants: spectral reconstruction,
//! geometric-mean endpoints and commuting reduction, Loewner predicate
//! soundness, commuting collapse of every divergence, derivative identities,
//! channel contracts, and solver-order inequalities.

use proptest::prelude::*;
use qrenyi::channel::{computational_pinching, derive_seed, random_channel, random_state};
use qrenyi::divergence::{
    belavkin_staszewski, classical_renyi, geometric_renyi, geometric_trace_fn,
    geometric_trace_fn_dalpha, petz_renyi, sandwiched_renyi, State,
};
use qrenyi::matrix::{
    loewner_geq, matrix_function, support_projector, weighted_geometric_mean, CMatrix,
    HermitianOperator, ToleranceConfig, ZeroHandling, C64,
};
use qrenyi::solver::{kringel, sharp_renyi, verify_primal_constraint, DivergenceKind, SolverConfig};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

/// Random Hermitian matrix (not necessarily PSD) from a seed.
fn random_hermitian(dim: usize, seed: u64) -> HermitianOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    HermitianOperator::new(raw).unwrap()
}

/// Random unitary: eigenvector frame of a random Hermitian matrix.
fn random_unitary(dim: usize, seed: u64) -> CMatrix {
    random_hermitian(dim, seed).spectral().eigenvectors
}

/// Pair of states diagonal in a common random basis, plus their paired
/// eigenvalue vectors.
fn commuting_pair(dim: usize, seed: u64) -> (State, State, Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 100));
    let u = random_unitary(dim, derive_seed(seed, 101));
    let mut p: Vec<f64> = (0..dim).map(|_| rng.random_range(0.05..1.0)).collect();
    let mut q: Vec<f64> = (0..dim).map(|_| rng.random_range(0.05..1.0)).collect();
    let sp: f64 = p.iter().sum();
    let sq: f64 = q.iter().sum();
    p.iter_mut().for_each(|v| *v /= sp);
    q.iter_mut().for_each(|v| *v /= sq);
    let embed = |vals: &[f64]| {
        let d = CMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                C64::new(vals[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        State::new(
            HermitianOperator::new(&u * d * u.adjoint()).unwrap(),
            &tol(),
        )
        .unwrap()
    };
    (embed(&p), embed(&q), p, q)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn identity_matrix_function_reconstructs(seed in any::<u64>(), dim in 2usize..=8) {
        let x = random_hermitian(dim, seed);
        let out = matrix_function(&x, |v| v, ZeroHandling::Reject, &tol()).unwrap();
        prop_assert!(out.sub(&x).operator_norm() < 1e-10);
    }

    #[test]
    fn geometric_mean_endpoints_hold(seed in any::<u64>(), dim in 2usize..=5) {
        let a = random_state(dim, dim, derive_seed(seed, 0)).unwrap();
        let b = random_state(dim, dim, derive_seed(seed, 1)).unwrap();
        let g0 = weighted_geometric_mean(a.op(), b.op(), 0.0, &tol()).unwrap();
        prop_assert!(g0.sub(a.op()).operator_norm() < 1e-9);
        let g1 = weighted_geometric_mean(a.op(), b.op(), 1.0, &tol()).unwrap();
        prop_assert!(g1.sub(b.op()).operator_norm() < 1e-9);
    }

    #[test]
    fn geometric_mean_commuting_reduction(seed in any::<u64>(), dim in 2usize..=4) {
        let (a, b, p, q) = commuting_pair(dim, seed);
        let u = random_unitary(dim, derive_seed(seed, 101));
        for alpha in [0.25, 0.5, 1.5, 2.5] {
            let mean = weighted_geometric_mean(a.op(), b.op(), alpha, &tol()).unwrap();
            let expected_diag = CMatrix::from_fn(dim, dim, |i, j| {
                if i == j {
                    C64::new(p[i].powf(1.0 - alpha) * q[i].powf(alpha), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            let expected = HermitianOperator::new(&u * expected_diag * u.adjoint()).unwrap();
            prop_assert!(
                mean.sub(&expected).operator_norm() < 1e-9,
                "α={alpha}: mismatch {}", mean.sub(&expected).operator_norm()
            );
        }
    }

    #[test]
    fn loewner_predicate_matches_eigen_signs(seed in any::<u64>(), dim in 2usize..=5) {
        let x = random_hermitian(dim, derive_seed(seed, 0));
        let y = random_hermitian(dim, derive_seed(seed, 1));
        let claimed = loewner_geq(&x, &y, &tol()).unwrap();
        let spectrum = x.sub(&y).spectral().eigenvalues;
        let exhaustive = spectrum.iter().all(|&l| l >= -tol().psd_slack);
        prop_assert_eq!(claimed, exhaustive);
    }

    #[test]
    fn support_projector_is_idempotent(seed in any::<u64>(), dim in 2usize..=6) {
        let rank = 1 + (seed as usize) % dim;
        let x = random_state(dim, rank, seed).unwrap();
        let p = support_projector(x.op(), &tol()).unwrap();
        let p2 = HermitianOperator::new(p.matrix() * p.matrix()).unwrap();
        prop_assert!(p2.sub(&p).operator_norm() < 1e-10);
    }

    #[test]
    fn commuting_collapse_of_closed_forms(seed in any::<u64>(), dim in 2usize..=4) {
        let (rho, sigma, p, q) = commuting_pair(dim, seed);
        for alpha in [0.5, 1.5, 2.0, 3.0] {
            let classical = classical_renyi(&p, &q, alpha).unwrap();
            let geo = geometric_renyi(&rho, &sigma, alpha, &tol()).unwrap().value;
            let petz = petz_renyi(&rho, &sigma, alpha, &tol()).unwrap().value;
            let sand = sandwiched_renyi(&rho, &sigma, alpha, &tol()).unwrap().value;
            prop_assert!((geo - classical).abs() < 1e-8, "geometric α={alpha}");
            prop_assert!((petz - classical).abs() < 1e-8, "petz α={alpha}");
            prop_assert!((sand - classical).abs() < 1e-8, "sandwiched α={alpha}");
        }
    }

    #[test]
    fn derivative_identity_at_one(seed in any::<u64>(), dim in 2usize..=4) {
        let rho = random_state(dim, dim, derive_seed(seed, 0)).unwrap();
        let sigma = random_state(dim, dim, derive_seed(seed, 1)).unwrap();
        let d = geometric_trace_fn_dalpha(&rho, &sigma, 1.0, &tol()).unwrap();
        let bs = belavkin_staszewski(&rho, &sigma, &tol()).unwrap().value;
        prop_assert!((d - bs).abs() < 1e-8, "dalpha {d} vs BS {bs}");
    }

    #[test]
    fn geometric_limit_brackets_bs(seed in any::<u64>(), dim in 2usize..=3) {
        let rho = random_state(dim, dim, derive_seed(seed, 0)).unwrap();
        let sigma = random_state(dim, dim, derive_seed(seed, 1)).unwrap();
        let bs = belavkin_staszewski(&rho, &sigma, &tol()).unwrap().value;
        for h in [1e-3, 1e-4] {
            let above = geometric_renyi(&rho, &sigma, 1.0 + h, &tol()).unwrap().value;
            let below = geometric_renyi(&rho, &sigma, 1.0 - h, &tol()).unwrap().value;
            let second_diff = (above - 2.0 * bs + below).abs() / (h * h);
            let slack = 10.0 * h * second_diff.max(1.0);
            prop_assert!(
                below - slack <= bs && bs <= above + slack,
                "h={h}: {below} / {bs} / {above} (slack {slack})"
            );
        }
    }

    #[test]
    fn dalpha_matches_central_differences(seed in any::<u64>(), dim in 2usize..=3) {
        let rho = random_state(dim, dim, derive_seed(seed, 0)).unwrap();
        let sigma = random_state(dim, dim, derive_seed(seed, 1)).unwrap();
        let h = 1e-5;
        for alpha in [1.01, 1.5, 2.0, 3.0] {
            let analytic = geometric_trace_fn_dalpha(&rho, &sigma, alpha, &tol()).unwrap();
            let plus = geometric_trace_fn(&rho, &sigma, alpha + h, &tol()).unwrap();
            let minus = geometric_trace_fn(&rho, &sigma, alpha - h, &tol()).unwrap();
            let fd = (plus - minus) / (2.0 * h);
            let rel = (analytic - fd).abs() / analytic.abs().max(1.0);
            prop_assert!(rel < 1e-6, "α={alpha}: {analytic} vs {fd}");
        }
    }

    #[test]
    fn channel_contracts_hold(seed in any::<u64>(), dim in 2usize..=4) {
        let x = random_state(dim, dim, derive_seed(seed, 0)).unwrap();
        let n = random_channel(dim, dim, 2 + (seed as usize) % 3, derive_seed(seed, 1)).unwrap();
        let y = n.apply(x.op()).unwrap();
        prop_assert!((y.trace() - x.trace()).abs() <= 1e-9);
        prop_assert!(y.min_eigenvalue() >= -1e-9);

        // pinching idempotence
        let pinch = computational_pinching(dim);
        let once = pinch.apply(x.op()).unwrap();
        let twice = pinch.apply(&once).unwrap();
        prop_assert!(twice.sub(&once).operator_norm() < 1e-10);

        // operator-order preservation: A ≥ ρ ⇒ N(A) ≥ N(ρ)
        let bump = random_state(dim, dim, derive_seed(seed, 2)).unwrap();
        let a = HermitianOperator::new(x.op().matrix() + bump.op().matrix()).unwrap();
        let na = n.apply(&a).unwrap();
        let nx = n.apply(x.op()).unwrap();
        prop_assert!(na.sub(&nx).min_eigenvalue() >= -1e-9);
    }

    #[test]
    fn geometric_dpi_spot_checks(seed in any::<u64>(), dim in 2usize..=3) {
        let rho = random_state(dim, dim, derive_seed(seed, 0)).unwrap();
        let sigma = random_state(dim, dim, derive_seed(seed, 1)).unwrap();
        let n = random_channel(dim, dim, dim, derive_seed(seed, 2)).unwrap();
        let rho_out = n.apply_state(&rho, &tol()).unwrap();
        let sigma_out = n.apply_state(&sigma, &tol()).unwrap();
        for alpha in [1.3, 1.7, 2.0] {
            let before = geometric_renyi(&rho, &sigma, alpha, &tol()).unwrap().value;
            let after = geometric_renyi(&rho_out, &sigma_out, alpha, &tol()).unwrap().value;
            prop_assert!(after <= before + 1e-7, "α={alpha}: {before} → {after}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn minimizer_collapses_to_rho_near_one(seed in any::<u64>()) {
        let rho = random_state(2, 2, derive_seed(seed, 0)).unwrap();
        let sigma = random_state(2, 2, derive_seed(seed, 1)).unwrap();
        let mut distances = Vec::new();
        for alpha in [1.1, 1.01, 1.001] {
            let (_, report) = sharp_renyi(&rho, &sigma, alpha, &cfg(), &tol()).unwrap();
            distances.push(report.minimizer.sub(rho.op()).operator_norm());
        }
        for w in distances.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-4, "distances {distances:?}");
        }
        prop_assert!(distances[2] < 1e-2, "distances {distances:?}");
    }

    #[test]
    fn primal_constraint_on_converged_solves(seed in any::<u64>(), dim in 2usize..=3) {
        let rho = random_state(dim, dim, derive_seed(seed, 0)).unwrap();
        let sigma = random_state(dim, dim, derive_seed(seed, 1)).unwrap();
        for alpha in [1.5, 2.0, 3.0] {
            let (_, report) = sharp_renyi(&rho, &sigma, alpha, &cfg(), &tol()).unwrap();
            prop_assert!(report.converged);
            let margin = verify_primal_constraint(&report, &rho, &sigma, alpha, &tol()).unwrap();
            prop_assert!(margin >= -1e-6, "α={alpha}: margin {margin}");
        }
    }

    #[test]
    fn kringel_sandwich_inequality(seed in any::<u64>(), dim in 2usize..=3) {
        let rho = random_state(dim, dim, derive_seed(seed, 0)).unwrap();
        let sigma = random_state(dim, dim, derive_seed(seed, 1)).unwrap();
        for alpha in [1.5, 2.0] {
            let sand = sandwiched_renyi(&rho, &sigma, alpha, &tol()).unwrap().value;
            let (kp, _) = kringel(DivergenceKind::Petz, &rho, &sigma, alpha, &cfg(), &tol()).unwrap();
            let (sharp, _) = sharp_renyi(&rho, &sigma, alpha, &cfg(), &tol()).unwrap();
            prop_assert!(sand - 1e-6 <= kp.value, "α={alpha}: {sand} vs {}", kp.value);
            prop_assert!(kp.value <= sharp.value + 1e-6, "α={alpha}: {} vs {}", kp.value, sharp.value);
        }
    }

    #[test]
    fn sharp_dominated_by_geometric(seed in any::<u64>(), dim in 2usize..=3) {
        let rho = random_state(dim, dim, derive_seed(seed, 0)).unwrap();
        let sigma = random_state(dim, dim, derive_seed(seed, 1)).unwrap();
        for alpha in [1.5, 2.5, 3.5] {
            let (sharp, _) = sharp_renyi(&rho, &sigma, alpha, &cfg(), &tol()).unwrap();
            let geo = geometric_renyi(&rho, &sigma, alpha, &tol()).unwrap().value;
            prop_assert!(sharp.value <= geo + 1e-6, "α={alpha}: {} vs {geo}", sharp.value);
        }
    }
}

#[test]
fn pinched_pair_keeps_classical_chain() {
    // pinching a non-commuting pair yields a commuting one whose kringel
    // value equals the classical divergence of the diagonals
    let rho = random_state(3, 3, 405).unwrap();
    let sigma = random_state(3, 3, 406).unwrap();
    let pinch = computational_pinching(3);
    let rho_p = pinch.apply_state(&rho, &tol()).unwrap();
    let sigma_p = pinch.apply_state(&sigma, &tol()).unwrap();
    let diag = |s: &State| -> Vec<f64> {
        (0..s.dim()).map(|i| s.op().matrix()[(i, i)].re).collect()
    };
    let p = diag(&rho_p);
    let q = diag(&sigma_p);
    for alpha in [1.5, 2.0] {
        let classical = classical_renyi(&p, &q, alpha).unwrap();
        let (kp, _) = kringel(DivergenceKind::Petz, &rho_p, &sigma_p, alpha, &cfg(), &tol()).unwrap();
        assert!(
            (kp.value - classical).abs() < 1e-6,
            "α={alpha}: {} vs {classical}",
            kp.value
        );
        // data processing: the pinched pair cannot exceed the original
        let (kp_orig, _) = kringel(DivergenceKind::Petz, &rho, &sigma, alpha, &cfg(), &tol()).unwrap();
        assert!(kp.value <= kp_orig.value + 1e-5);
    }
}

#[test]
fn states_survive_projector_boundaries() {
    // deterministic boundary-support case: σ singular, ρ inside supp(σ)
    let u = random_unitary(3, 777);
    let embed = |vals: &[f64]| {
        let d = CMatrix::from_fn(3, 3, |i, j| {
            if i == j {
                C64::new(vals[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        State::new(HermitianOperator::new(&u * d * u.adjoint()).unwrap(), &tol()).unwrap()
    };
    let rho = embed(&[0.6, 0.4, 0.0]);
    let sigma = embed(&[0.5, 0.5, 0.0]);
    let (sharp, report) = sharp_renyi(&rho, &sigma, 2.0, &cfg(), &tol()).unwrap();
    let classical = classical_renyi(&[0.6, 0.4], &[0.5, 0.5], 2.0).unwrap();
    assert!(
        (sharp.value - classical).abs() < 1e-6,
        "sharp {} vs classical {classical}",
        sharp.value
    );
    assert!(report.converged);
    // support projector of the minimizer stays inside supp(σ)
    let pi_sigma = support_projector(sigma.op(), &tol()).unwrap();
    let outside = HermitianOperator::new(
        (HermitianOperator::identity(3).sub(&pi_sigma)).matrix() * report.minimizer.matrix(),
    )
    .unwrap();
    assert!(outside.operator_norm() < 1e-9);
}

#[test]
fn unitary_helper_is_unitary() {
    let u = random_unitary(4, 11);
    let gram = u.adjoint() * &u;
    let id = CMatrix::identity(4, 4);
    assert!((gram - id).norm() < 1e-10);
}
