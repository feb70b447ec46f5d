//! Quantum channels and seeded generators: Kraus channels, pinching, partial
//! trace, depolarizing, random CPTP maps, and random states.

use crate::divergence::State;
use crate::matrix::{CMatrix, HermitianOperator, ToleranceConfig, C64};
use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("dimension mismatch: channel expects input dim {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("Kraus operators are not trace-preserving: ‖ΣK†K − 1‖ = {deviation:.3e}")]
    NotTracePreserving { deviation: f64 },

    #[error("basis is not orthonormal: max |⟨v_i|v_j⟩ − δ_ij| = {deviation:.3e}")]
    NotOrthonormal { deviation: f64 },

    #[error("dimension {dim} does not factor as {dim_a}·{dim_b}")]
    Factorization { dim: usize, dim_a: usize, dim_b: usize },

    #[error("invalid generator parameters: {0}")]
    BadParameters(String),
}

/// Completely positive trace-preserving map given by a Kraus-operator list.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    kraus: Vec<CMatrix>,
}

impl QuantumChannel {
    /// Validates Σ K_i† K_i = 1 within 1e-9; complete positivity is automatic
    /// from the Kraus form.
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self, ChannelError> {
        if kraus.is_empty() {
            return Err(ChannelError::BadParameters("empty Kraus list".into()));
        }
        let dim_in = kraus[0].ncols();
        let dim_out = kraus[0].nrows();
        for k in &kraus {
            if k.ncols() != dim_in || k.nrows() != dim_out {
                return Err(ChannelError::BadParameters(
                    "Kraus operators must share a common shape".into(),
                ));
            }
        }
        let mut sum = CMatrix::zeros(dim_in, dim_in);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let deviation = (sum - CMatrix::identity(dim_in, dim_in)).norm();
        if deviation > 1e-9 {
            return Err(ChannelError::NotTracePreserving { deviation });
        }
        Ok(Self { kraus })
    }

    pub fn dim_in(&self) -> usize {
        self.kraus[0].ncols()
    }

    pub fn dim_out(&self) -> usize {
        self.kraus[0].nrows()
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kraus: vec![CMatrix::identity(dim, dim)],
        }
    }

    /// Fully depolarizing channel X ↦ Tr(X)·1/d, with Kraus ops |i⟩⟨j|/√d.
    pub fn fully_depolarizing(dim: usize) -> Self {
        let scale = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
        let mut kraus = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let mut k = CMatrix::zeros(dim, dim);
                k[(i, j)] = scale;
                kraus.push(k);
            }
        }
        Self { kraus }
    }

    /// Σ K_i X K_i†.
    pub fn apply(&self, x: &HermitianOperator) -> Result<HermitianOperator, ChannelError> {
        if x.dim() != self.dim_in() {
            return Err(ChannelError::DimensionMismatch {
                expected: self.dim_in(),
                got: x.dim(),
            });
        }
        let mut out = CMatrix::zeros(self.dim_out(), self.dim_out());
        for k in &self.kraus {
            out += k * x.matrix() * k.adjoint();
        }
        Ok(HermitianOperator::new(out).expect("square by construction"))
    }

    /// Applies the channel to a state, carrying the (preserved) trace along.
    pub fn apply_state(&self, s: &State, tol: &ToleranceConfig) -> Result<State, ChannelError> {
        let op = self.apply(s.op())?;
        State::new(op, tol).map_err(|e| ChannelError::BadParameters(e.to_string()))
    }
}

/// Pinching (dephasing) channel Σ |i⟩⟨i| · |i⟩⟨i| for an orthonormal basis.
pub fn pinching(basis: &[DVector<C64>]) -> Result<QuantumChannel, ChannelError> {
    if basis.is_empty() {
        return Err(ChannelError::BadParameters("empty basis".into()));
    }
    let dim = basis[0].len();
    if basis.len() != dim || basis.iter().any(|v| v.len() != dim) {
        return Err(ChannelError::BadParameters(
            "basis must contain dim vectors of length dim".into(),
        ));
    }
    let mut deviation = 0.0f64;
    for (i, vi) in basis.iter().enumerate() {
        for (j, vj) in basis.iter().enumerate() {
            let g = vi.dotc(vj);
            let target = if i == j { 1.0 } else { 0.0 };
            deviation = deviation.max((g - C64::new(target, 0.0)).norm());
        }
    }
    if deviation > 1e-10 {
        return Err(ChannelError::NotOrthonormal { deviation });
    }
    let kraus: Vec<CMatrix> = basis.iter().map(|v| v * v.adjoint()).collect();
    Ok(QuantumChannel { kraus })
}

/// Pinching in the computational basis.
pub fn computational_pinching(dim: usize) -> QuantumChannel {
    let basis: Vec<DVector<C64>> = (0..dim)
        .map(|i| {
            DVector::from_fn(dim, |r, _| {
                if r == i {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
        })
        .collect();
    pinching(&basis).expect("computational basis is orthonormal")
}

/// Which tensor factor of H_A ⊗ H_B to trace out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceOut {
    A,
    B,
}

/// Partial trace of an operator on H_A ⊗ H_B (row-major tensor index a·dim_b + b).
pub fn partial_trace(
    x: &HermitianOperator,
    dim_a: usize,
    dim_b: usize,
    traced: TraceOut,
) -> Result<HermitianOperator, ChannelError> {
    if dim_a * dim_b != x.dim() {
        return Err(ChannelError::Factorization {
            dim: x.dim(),
            dim_a,
            dim_b,
        });
    }
    let m = x.matrix();
    let out = match traced {
        TraceOut::B => CMatrix::from_fn(dim_a, dim_a, |a, a2| {
            (0..dim_b).map(|b| m[(a * dim_b + b, a2 * dim_b + b)]).sum()
        }),
        TraceOut::A => CMatrix::from_fn(dim_b, dim_b, |b, b2| {
            (0..dim_a).map(|a| m[(a * dim_b + b, a * dim_b + b2)]).sum()
        }),
    };
    Ok(HermitianOperator::new(out).expect("square by construction"))
}

fn gaussian_complex(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    })
}

/// Random rank-`rank` density matrix GG†/Tr(GG†), fully determined by `seed`.
pub fn random_state(dim: usize, rank: usize, seed: u64) -> Result<State, ChannelError> {
    if rank == 0 || rank > dim {
        return Err(ChannelError::BadParameters(format!(
            "rank must lie in 1..=dim, got rank {rank} for dim {dim}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian_complex(&mut rng, dim, rank);
    let gram = &g * g.adjoint();
    let trace = gram.trace().re;
    let op = HermitianOperator::new(gram * C64::new(1.0 / trace, 0.0))
        .expect("square by construction");
    State::new(op, &ToleranceConfig::default())
        .map_err(|e| ChannelError::BadParameters(e.to_string()))
}

/// Random CPTP map from a Haar-ish random isometry: QR of a complex Gaussian
/// (dim_out·kraus_count) × dim_in block, sliced into Kraus operators.
pub fn random_channel(
    dim_in: usize,
    dim_out: usize,
    kraus_count: usize,
    seed: u64,
) -> Result<QuantumChannel, ChannelError> {
    if kraus_count == 0 {
        return Err(ChannelError::BadParameters("kraus_count must be ≥ 1".into()));
    }
    if dim_out * kraus_count < dim_in {
        return Err(ChannelError::BadParameters(format!(
            "no isometry: dim_out·kraus_count = {} < dim_in = {dim_in}",
            dim_out * kraus_count
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian_complex(&mut rng, dim_out * kraus_count, dim_in);
    let q = g.qr().q(); // thin Q: (dim_out·kraus_count) × dim_in, Q†Q = 1
    let kraus: Vec<CMatrix> = (0..kraus_count)
        .map(|i| q.rows(i * dim_out, dim_out).into_owned())
        .collect();
    QuantumChannel::new(kraus)
}

/// Deterministic per-trial seed derivation (SplitMix64 over seed and index),
/// so parallel and serial suite runs draw identical instances.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
