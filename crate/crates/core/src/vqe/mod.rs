//! Scar-targeting variational eigensolver: cost, gradients and training.

mod adam;
mod cost;
mod gradient;
mod train;

pub use adam::Adam;
pub use cost::{cost, CostBreakdown, CostConfig, CostWeights, InfidelityObjective, Objective};
pub use gradient::{adjoint_gradient, gradient, parameter_shift_gradient, GradientMethod};
pub use train::{train, train_objective, RunRecord, TrainConfig, TrainFailure};
