//! Dense Hermitian linear algebra: spectral decompositions, matrix functions,
//! pseudo-inverse powers, support projectors, Loewner-order predicates, and
//! the weighted matrix geometric mean.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use thiserror::Error;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not positive semi-definite: min eigenvalue {min_eig:.3e} below -{slack:.3e}")]
    NotPsd { min_eig: f64, slack: f64 },

    #[error("scalar function undefined at retained eigenvalue {eigenvalue:.6e}")]
    Domain { eigenvalue: f64 },

    #[error("support condition failed: {0}")]
    Support(String),

    #[error("invalid tolerance configuration: {0}")]
    BadTolerance(String),
}

/// Thresholds governing rank cutoffs and semidefiniteness slack.
///
/// `rank_cutoff_rel` is relative to the largest |eigenvalue|: anything below
/// is treated as exactly zero by pseudo-inverses and support projectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    pub rank_cutoff_rel: f64,
    pub psd_slack: f64,
    pub support_slack: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            rank_cutoff_rel: 1e-10,
            psd_slack: 1e-9,
            support_slack: 1e-9,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<(), MatrixError> {
        for (name, v) in [
            ("rank_cutoff_rel", self.rank_cutoff_rel),
            ("psd_slack", self.psd_slack),
            ("support_slack", self.support_slack),
        ] {
            if !(v > 0.0 && v < 1e-3) {
                return Err(MatrixError::BadTolerance(format!(
                    "{name} must lie in (0, 1e-3), got {v:.3e}"
                )));
            }
        }
        Ok(())
    }
}

/// A dense complex Hermitian matrix. Construction symmetrizes the input
/// as (X + X†)/2, so stored entries satisfy conjugate symmetry exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: CMatrix,
}

impl HermitianOperator {
    /// Wraps a square complex matrix, enforcing Hermiticity by symmetrization.
    pub fn new(mat: CMatrix) -> Result<Self, MatrixError> {
        if mat.nrows() != mat.ncols() {
            return Err(MatrixError::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        let sym = (&mat + mat.adjoint()) * C64::new(0.5, 0.0);
        Ok(Self { mat: sym })
    }

    /// Builds a real diagonal matrix.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mat = CMatrix::from_fn(diag.len(), diag.len(), |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self { mat }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: CMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    /// Real trace; the imaginary part of a Hermitian trace is exactly zero.
    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Spectral decomposition with eigenvalues sorted ascending.
    pub fn spectral(&self) -> SpectralDecomposition {
        let eig = nalgebra::SymmetricEigen::new(self.mat.clone());
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let eigenvalues = DVector::from_iterator(
            self.dim(),
            order.iter().map(|&i| eig.eigenvalues[i]),
        );
        let eigenvectors = CMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            eig.eigenvectors[(r, order[c])]
        });
        SpectralDecomposition {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectral().eigenvalues[0]
    }

    /// Operator norm (largest |eigenvalue|).
    pub fn operator_norm(&self) -> f64 {
        let ev = self.spectral().eigenvalues;
        ev.iter().fold(0.0, |m, &l| m.max(l.abs()))
    }

    /// Kronecker (tensor) product.
    pub fn kron(&self, other: &Self) -> Self {
        Self {
            mat: self.mat.kronecker(&other.mat),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            mat: &self.mat * C64::new(s, 0.0),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            mat: &self.mat - &other.mat,
        }
    }
}

/// Eigenvalues ascending plus the unitary of eigenvectors (as columns).
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    /// U diag(λ) U†.
    pub fn reconstruct(&self) -> HermitianOperator {
        self.rebuild_with(|l| l)
    }

    /// U diag(f(λ)) U†, for an arbitrary replacement of the spectrum.
    pub fn rebuild_with(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        let diag = CMatrix::from_fn(self.eigenvalues.len(), self.eigenvalues.len(), |i, j| {
            if i == j {
                C64::new(f(self.eigenvalues[i]), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let mat = &self.eigenvectors * diag * self.eigenvectors.adjoint();
        // eigenvector round-off can leave a ~1e-16 skew part; symmetrize it away
        HermitianOperator::new(mat).expect("square by construction")
    }
}

/// How a matrix function treats eigenvalues below the rank cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroHandling {
    /// Below-cutoff eigenvalues map to 0 without consulting `f`.
    MapZeroToZero,
    /// Below-cutoff eigenvalues are snapped to 0 and fed to `f`; a non-finite
    /// result is a domain error.
    Reject,
}

fn rank_cutoff(eigenvalues: &DVector<f64>, tol: &ToleranceConfig) -> f64 {
    let max_abs = eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    tol.rank_cutoff_rel * max_abs
}

/// Applies a scalar map to the spectrum: U diag(f(λ)) U†.
pub fn matrix_function(
    x: &HermitianOperator,
    f: impl Fn(f64) -> f64,
    zero_handling: ZeroHandling,
    tol: &ToleranceConfig,
) -> Result<HermitianOperator, MatrixError> {
    let spec = x.spectral();
    let cutoff = rank_cutoff(&spec.eigenvalues, tol);
    let mut mapped = Vec::with_capacity(spec.eigenvalues.len());
    for &l in spec.eigenvalues.iter() {
        let v = if l.abs() <= cutoff {
            match zero_handling {
                ZeroHandling::MapZeroToZero => 0.0,
                ZeroHandling::Reject => {
                    let fv = f(0.0);
                    if !fv.is_finite() {
                        return Err(MatrixError::Domain { eigenvalue: 0.0 });
                    }
                    fv
                }
            }
        } else {
            let fv = f(l);
            if !fv.is_finite() {
                return Err(MatrixError::Domain { eigenvalue: l });
            }
            fv
        };
        mapped.push(v);
    }
    Ok(rebuild_from_values(&spec, &mapped))
}

fn rebuild_from_values(spec: &SpectralDecomposition, vals: &[f64]) -> HermitianOperator {
    let n = vals.len();
    let diag = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(vals[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let mat = &spec.eigenvectors * diag * spec.eigenvectors.adjoint();
    HermitianOperator::new(mat).expect("square by construction")
}

fn check_psd(spec: &SpectralDecomposition, tol: &ToleranceConfig) -> Result<(), MatrixError> {
    let min_eig = spec.eigenvalues[0];
    if min_eig < -tol.psd_slack {
        return Err(MatrixError::NotPsd {
            min_eig,
            slack: tol.psd_slack,
        });
    }
    Ok(())
}

/// Raises a PSD matrix to a (possibly negative) power on its support:
/// eigenvalues above the rank cutoff map to λ^power, the rest to 0.
pub fn pseudo_power(
    x: &HermitianOperator,
    power: f64,
    tol: &ToleranceConfig,
) -> Result<HermitianOperator, MatrixError> {
    let spec = x.spectral();
    check_psd(&spec, tol)?;
    let cutoff = rank_cutoff(&spec.eigenvalues, tol);
    let vals: Vec<f64> = spec
        .eigenvalues
        .iter()
        .map(|&l| if l <= cutoff { 0.0 } else { l.powf(power) })
        .collect();
    Ok(rebuild_from_values(&spec, &vals))
}

/// Projector onto the span of eigenvectors with eigenvalue above the cutoff.
pub fn support_projector(
    x: &HermitianOperator,
    tol: &ToleranceConfig,
) -> Result<HermitianOperator, MatrixError> {
    let spec = x.spectral();
    check_psd(&spec, tol)?;
    let cutoff = rank_cutoff(&spec.eigenvalues, tol);
    let vals: Vec<f64> = spec
        .eigenvalues
        .iter()
        .map(|&l| if l <= cutoff { 0.0 } else { 1.0 })
        .collect();
    Ok(rebuild_from_values(&spec, &vals))
}

/// Support rank: number of eigenvalues above the cutoff.
pub fn support_rank(x: &HermitianOperator, tol: &ToleranceConfig) -> Result<usize, MatrixError> {
    let spec = x.spectral();
    check_psd(&spec, tol)?;
    let cutoff = rank_cutoff(&spec.eigenvalues, tol);
    Ok(spec.eigenvalues.iter().filter(|&&l| l > cutoff).count())
}

/// Loewner order predicate: X ≥ Y iff min eig(X − Y) ≥ −psd_slack.
///
/// The slack absorbs optimizer outputs that sit exactly on the boundary.
pub fn loewner_geq(
    x: &HermitianOperator,
    y: &HermitianOperator,
    tol: &ToleranceConfig,
) -> Result<bool, MatrixError> {
    if x.dim() != y.dim() {
        return Err(MatrixError::DimensionMismatch {
            left: x.dim(),
            right: y.dim(),
        });
    }
    Ok(x.sub(y).min_eigenvalue() >= -tol.psd_slack)
}

/// supp(X) ⊆ supp(Y), tested as ‖(1 − Π_Y) X (1 − Π_Y)‖ ≤ support_slack·‖X‖.
pub fn supp_contained(
    x: &HermitianOperator,
    y: &HermitianOperator,
    tol: &ToleranceConfig,
) -> Result<bool, MatrixError> {
    if x.dim() != y.dim() {
        return Err(MatrixError::DimensionMismatch {
            left: x.dim(),
            right: y.dim(),
        });
    }
    check_psd(&x.spectral(), tol)?;
    let proj = support_projector(y, tol)?;
    let complement = HermitianOperator::identity(x.dim()).sub(&proj);
    let residual =
        HermitianOperator::new(complement.matrix() * x.matrix() * complement.matrix())
            .expect("square by construction");
    Ok(residual.operator_norm() <= tol.support_slack * x.operator_norm())
}

/// S X S for Hermitian S and X, re-symmetrized to kill round-off skew.
pub fn conjugate_by(x: &HermitianOperator, s: &HermitianOperator) -> HermitianOperator {
    HermitianOperator::new(s.matrix() * x.matrix() * s.matrix()).expect("square by construction")
}

/// Weighted matrix geometric mean A #_α B = A^{1/2}(A^{-1/2} B A^{-1/2})^α A^{1/2},
/// with pseudo-inverses restricted to supp(A).
///
/// For α ≥ 0 this requires supp(B) ⊆ supp(A); for α < 0 both operators must be
/// strictly positive definite.
pub fn weighted_geometric_mean(
    a: &HermitianOperator,
    b: &HermitianOperator,
    alpha: f64,
    tol: &ToleranceConfig,
) -> Result<HermitianOperator, MatrixError> {
    if a.dim() != b.dim() {
        return Err(MatrixError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    check_psd(&a.spectral(), tol)?;
    check_psd(&b.spectral(), tol)?;
    if alpha >= 0.0 {
        if !supp_contained(b, a, tol)? {
            return Err(MatrixError::Support(
                "geometric mean with α ≥ 0 needs supp(B) ⊆ supp(A)".into(),
            ));
        }
    } else if a.min_eigenvalue() <= tol.psd_slack || b.min_eigenvalue() <= tol.psd_slack {
        return Err(MatrixError::Support(
            "geometric mean with α < 0 needs positive definite inputs".into(),
        ));
    }

    let a_half = pseudo_power(a, 0.5, tol)?;
    let a_inv_half = pseudo_power(a, -0.5, tol)?;
    let inner = HermitianOperator::new(a_inv_half.matrix() * b.matrix() * a_inv_half.matrix())
        .expect("square by construction");
    let zero_handling = if alpha < 0.0 {
        ZeroHandling::Reject
    } else {
        ZeroHandling::MapZeroToZero
    };
    let inner_pow = matrix_function(&inner, |x| x.powf(alpha), zero_handling, tol)?;
    Ok(
        HermitianOperator::new(a_half.matrix() * inner_pow.matrix() * a_half.matrix())
            .expect("square by construction"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn herm(entries: &[(f64, f64)], dim: usize) -> HermitianOperator {
        let mat = CMatrix::from_fn(dim, dim, |i, j| {
            let (re, im) = entries[i * dim + j];
            C64::new(re, im)
        });
        HermitianOperator::new(mat).unwrap()
    }

    #[test]
    fn construction_symmetrizes() {
        let mat = CMatrix::from_fn(2, 2, |i, j| C64::new((i + 2 * j) as f64, 0.1));
        let h = HermitianOperator::new(mat).unwrap();
        let m = h.matrix();
        for i in 0..2 {
            for j in 0..2 {
                let d = (m[(i, j)] - m[(j, i)].conj()).norm();
                assert!(d < 1e-12, "entry ({i},{j}) not conjugate-symmetric");
            }
        }
    }

    #[test]
    fn spectral_reconstructs() {
        let h = herm(&[(2.0, 0.0), (0.3, 0.4), (0.3, -0.4), (1.0, 0.0)], 2);
        let spec = h.spectral();
        let diff = spec.reconstruct().sub(&h).operator_norm();
        assert!(diff < 1e-10, "reconstruction error {diff}");
        // U†U = 1
        let gram = spec.eigenvectors.adjoint() * &spec.eigenvectors;
        let id = CMatrix::identity(2, 2);
        assert!((gram - id).norm() < 1e-10);
        assert!(spec.eigenvalues[0] <= spec.eigenvalues[1]);
    }

    #[test]
    fn matrix_function_identity_returns_input() {
        let h = herm(&[(1.5, 0.0), (0.2, 0.7), (0.2, -0.7), (-0.5, 0.0)], 2);
        let tol = ToleranceConfig::default();
        let out = matrix_function(&h, |x| x, ZeroHandling::Reject, &tol).unwrap();
        assert!(out.sub(&h).operator_norm() < 1e-10);
    }

    #[test]
    fn matrix_function_square_on_diagonal() {
        let h = HermitianOperator::from_diagonal(&[1.0, 2.0]);
        let tol = ToleranceConfig::default();
        let out = matrix_function(&h, |x| x * x, ZeroHandling::Reject, &tol).unwrap();
        let expected = HermitianOperator::from_diagonal(&[1.0, 4.0]);
        assert!(out.sub(&expected).operator_norm() < 1e-12);
    }

    #[test]
    fn matrix_function_sqrt_with_zero() {
        // eigenvalues {0, 4} under map-zero-to-zero -> {0, 2}, same eigenvectors
        let h = herm(&[(2.0, 0.0), (2.0, 0.0), (2.0, 0.0), (2.0, 0.0)], 2);
        let tol = ToleranceConfig::default();
        let out = matrix_function(&h, |x| x.sqrt(), ZeroHandling::MapZeroToZero, &tol).unwrap();
        let ev = out.spectral().eigenvalues;
        assert!(ev[0].abs() < 1e-12);
        assert!((ev[1] - 2.0).abs() < 1e-12);
        // eigenvectors unchanged: out should be h / 2
        assert!(out.sub(&h.scale(0.5)).operator_norm() < 1e-10);
    }

    #[test]
    fn matrix_function_log_at_zero_rejects() {
        let h = HermitianOperator::from_diagonal(&[1.0, 0.0]);
        let tol = ToleranceConfig::default();
        let err = matrix_function(&h, |x| x.ln(), ZeroHandling::Reject, &tol);
        assert!(matches!(err, Err(MatrixError::Domain { .. })));
    }

    #[test]
    fn pseudo_power_diagonal() {
        let tol = ToleranceConfig::default();
        let h = HermitianOperator::from_diagonal(&[4.0, 0.0]);
        let out = pseudo_power(&h, -0.5, &tol).unwrap();
        let expected = HermitianOperator::from_diagonal(&[0.5, 0.0]);
        assert!(out.sub(&expected).operator_norm() < 1e-12);

        let id = HermitianOperator::identity(3);
        let out = pseudo_power(&id, -1.0, &tol).unwrap();
        assert!(out.sub(&id).operator_norm() < 1e-12);
    }

    #[test]
    fn pseudo_power_cuts_tiny_eigenvalues() {
        let tol = ToleranceConfig::default();
        let h = HermitianOperator::from_diagonal(&[9.0, 1e-15]);
        let out = pseudo_power(&h, -1.0, &tol).unwrap();
        let expected = HermitianOperator::from_diagonal(&[1.0 / 9.0, 0.0]);
        assert!(out.sub(&expected).operator_norm() < 1e-12);
    }

    #[test]
    fn pseudo_power_rejects_negative() {
        let tol = ToleranceConfig::default();
        let h = HermitianOperator::from_diagonal(&[1.0, -0.5]);
        assert!(matches!(
            pseudo_power(&h, 0.5, &tol),
            Err(MatrixError::NotPsd { .. })
        ));
    }

    #[test]
    fn support_projector_cases() {
        let tol = ToleranceConfig::default();
        let h = HermitianOperator::from_diagonal(&[1.0, 0.0]);
        let p = support_projector(&h, &tol).unwrap();
        assert!(p.sub(&h).operator_norm() < 1e-12);

        let pd = herm(&[(2.0, 0.0), (0.5, 0.1), (0.5, -0.1), (1.0, 0.0)], 2);
        let p = support_projector(&pd, &tol).unwrap();
        assert!(p.sub(&HermitianOperator::identity(2)).operator_norm() < 1e-10);

        // rank-1 |v><v| with ||v|| = 1 is its own support projector
        let v = DVector::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]);
        let vv = HermitianOperator::new(&v * v.adjoint()).unwrap();
        let p = support_projector(&vv, &tol).unwrap();
        assert!(p.sub(&vv).operator_norm() < 1e-10);
        // idempotent
        let p2 = HermitianOperator::new(p.matrix() * p.matrix()).unwrap();
        assert!(p2.sub(&p).operator_norm() < 1e-10);
    }

    #[test]
    fn loewner_geq_cases() {
        let tol = ToleranceConfig::default();
        let x = HermitianOperator::from_diagonal(&[2.0, 2.0]);
        let y = HermitianOperator::from_diagonal(&[1.0, 1.0]);
        assert!(loewner_geq(&x, &x, &tol).unwrap());
        assert!(loewner_geq(&x, &y, &tol).unwrap());
        let a = HermitianOperator::from_diagonal(&[1.0, 0.0]);
        let b = HermitianOperator::from_diagonal(&[0.0, 1.0]);
        assert!(!loewner_geq(&a, &b, &tol).unwrap());
        assert!(matches!(
            loewner_geq(&a, &HermitianOperator::identity(3), &tol),
            Err(MatrixError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn supp_contained_cases() {
        let tol = ToleranceConfig::default();
        let pd = herm(&[(2.0, 0.0), (0.5, 0.1), (0.5, -0.1), (1.0, 0.0)], 2);
        assert!(supp_contained(&pd, &pd, &tol).unwrap());
        let a = HermitianOperator::from_diagonal(&[1.0, 0.0]);
        let b = HermitianOperator::from_diagonal(&[0.0, 1.0]);
        assert!(!supp_contained(&a, &b, &tol).unwrap());
        let full = HermitianOperator::from_diagonal(&[2.0, 3.0]);
        assert!(supp_contained(&a, &full, &tol).unwrap());
    }

    #[test]
    fn geometric_mean_commuting_closed_form() {
        let tol = ToleranceConfig::default();
        let a = HermitianOperator::from_diagonal(&[1.0, 4.0]);
        let b = HermitianOperator::from_diagonal(&[9.0, 1.0]);
        let g = weighted_geometric_mean(&a, &b, 0.5, &tol).unwrap();
        let expected = HermitianOperator::from_diagonal(&[3.0, 2.0]);
        assert!(g.sub(&expected).operator_norm() < 1e-10);
    }

    #[test]
    fn geometric_mean_endpoints() {
        let tol = ToleranceConfig::default();
        let a = herm(&[(2.0, 0.0), (0.3, 0.2), (0.3, -0.2), (1.5, 0.0)], 2);
        let b = herm(&[(1.0, 0.0), (-0.1, 0.4), (-0.1, -0.4), (3.0, 0.0)], 2);
        let g0 = weighted_geometric_mean(&a, &b, 0.0, &tol).unwrap();
        assert!(g0.sub(&a).operator_norm() < 1e-9);
        let g1 = weighted_geometric_mean(&a, &b, 1.0, &tol).unwrap();
        assert!(g1.sub(&b).operator_norm() < 1e-9);
    }

    #[test]
    fn geometric_mean_rejects_bad_support() {
        let tol = ToleranceConfig::default();
        let a = HermitianOperator::from_diagonal(&[1.0, 0.0]);
        let b = HermitianOperator::from_diagonal(&[0.5, 0.5]);
        assert!(matches!(
            weighted_geometric_mean(&a, &b, 0.5, &tol),
            Err(MatrixError::Support(_))
        ));
        // α < 0 on singular input rejected even when supports align
        let c = HermitianOperator::from_diagonal(&[0.5, 0.0]);
        assert!(matches!(
            weighted_geometric_mean(&a, &c, -0.5, &tol),
            Err(MatrixError::Support(_))
        ));
    }
}
