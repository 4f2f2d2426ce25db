//! Pauli-string algebra and the benchmark model builders.

mod models;
mod pauli;
mod sparse;

pub use models::{
    annihilation, build_h1, build_h2, creation, inversion_operator, magnon_raising_operator,
    number, projector_zero, scar_state_h1, scar_tower_h2, symmetry_operator, EdgeConfig,
    H1Coefficients, H1Params, H2Params, Model, SectorSpec, Tower,
};
pub use pauli::{Pauli, PauliOperator, PauliString};
pub use sparse::SparseOperator;
