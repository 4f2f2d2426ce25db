//! Variational search for quantum many-body scar eigenstates.
//!
//! A statevector simulator, Pauli-string Hamiltonians for two scarred spin
//! chains, shallow parametric circuits and an energy-targeted cost are
//! combined into scans over target energies whose inverse-cost peaks mark
//! low-entanglement eigenstates. Exact diagonalization serves as the oracle.
//!
//! Numeric code is generic over [`scalar::Real`]; the aliases below fix the
//! precision for callers that do not care.

pub mod ansatz;
pub mod dynamics;
pub mod error;
pub mod exactdiag;
pub mod operators;
pub mod scalar;
pub mod scan;
pub mod statevector;
pub mod vqe;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Statevector64 = statevector::Statevector<f64>;
pub type Statevector32 = statevector::Statevector<f32>;
pub type PauliOperator64 = operators::PauliOperator<f64>;
pub type PauliOperator32 = operators::PauliOperator<f32>;
pub type Spectrum64 = exactdiag::SpectrumResult<f64>;
pub type Spectrum32 = exactdiag::SpectrumResult<f32>;
pub type RunRecord64 = vqe::RunRecord<f64>;
pub type RunRecord32 = vqe::RunRecord<f32>;
