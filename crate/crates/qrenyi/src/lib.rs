//! Quantum Rényi-type divergences over dense Hermitian matrices.
//!
//! Closed forms for the geometric (maximal), Petz, sandwiched and
//! Belavkin-Staszewski divergences, plus a Loewner-constrained optimizer
//! that realizes the sharp divergence and generic kringel divergences
//! `D°(ρ‖σ) = inf_{A ≥ ρ} D(A‖σ)`.

pub mod channel;
pub mod divergence;
pub mod harness;
pub mod matrix;
pub mod solver;

pub use divergence::{DivergenceValue, Method, State};
pub use matrix::{HermitianOperator, SpectralDecomposition, ToleranceConfig};
pub use solver::{DivergenceKind, SolverConfig, SolverReport};
