use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::ansatz::Circuit;
use crate::error::{Error, Result};
use crate::operators::{PauliOperator, SparseOperator};
use crate::scalar::{Real, C};
use crate::statevector::{inner, Statevector};

/// Relative weights of the energy-distance, variance and symmetry terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostWeights {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl CostWeights {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let w = CostWeights { a, b, c };
        w.validate()?;
        Ok(w)
    }

    /// Weights used throughout the scar hunts: `(0.05, 0.25, 0.70)`.
    pub fn standard() -> Self {
        CostWeights {
            a: 0.05,
            b: 0.25,
            c: 0.70,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_signs()?;
        let sum = self.a + self.b + self.c;
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidCost(format!("a + b + c = {sum}, expected 1")));
        }
        Ok(())
    }

    fn validate_signs(&self) -> Result<()> {
        if [self.a, self.b, self.c].iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidCost(format!(
                "weights must be finite and non-negative, got ({}, {}, {})",
                self.a, self.b, self.c
            )));
        }
        Ok(())
    }
}

/// Full configuration of the scar-targeting cost
/// `a <(H-E)^2> + b (<H^2> - <H>^2) + c <(S - s)^2>`.
///
/// The operators are compiled to sparse form on construction; `<H^2>` is
/// evaluated as `||H psi||^2`, which requires `H` to be Hermitian.
#[derive(Clone, Debug)]
pub struct CostConfig<T: Real = f64> {
    weights: CostWeights,
    target_energy: T,
    hamiltonian: PauliOperator<T>,
    symmetry_op: PauliOperator<T>,
    symmetry_value: T,
    h_sparse: SparseOperator<T>,
    s_sparse: SparseOperator<T>,
}

impl<T: Real> CostConfig<T> {
    pub fn new(
        weights: CostWeights,
        target_energy: T,
        hamiltonian: PauliOperator<T>,
        symmetry_op: PauliOperator<T>,
        symmetry_value: T,
    ) -> Result<Self> {
        weights.validate()?;
        Self::build(weights, target_energy, hamiltonian, symmetry_op, symmetry_value)
    }

    /// As [`new`](Self::new) but without the `a + b + c = 1` normalization;
    /// weights must still be non-negative.
    pub fn with_unnormalized_weights(
        weights: CostWeights,
        target_energy: T,
        hamiltonian: PauliOperator<T>,
        symmetry_op: PauliOperator<T>,
        symmetry_value: T,
    ) -> Result<Self> {
        weights.validate_signs()?;
        Self::build(weights, target_energy, hamiltonian, symmetry_op, symmetry_value)
    }

    fn build(
        weights: CostWeights,
        target_energy: T,
        hamiltonian: PauliOperator<T>,
        symmetry_op: PauliOperator<T>,
        symmetry_value: T,
    ) -> Result<Self> {
        if hamiltonian.num_qubits() != symmetry_op.num_qubits() {
            return Err(Error::SizeMismatch {
                expected: hamiltonian.num_qubits(),
                found: symmetry_op.num_qubits(),
            });
        }
        let tol = T::lit(1e-9) * T::one().max(hamiltonian.coefficient_norm());
        let residual = hamiltonian.hermiticity_residual();
        if residual > tol {
            return Err(Error::NotHermitian(residual.as_f64()));
        }
        let residual = symmetry_op.hermiticity_residual();
        if residual > tol {
            return Err(Error::NotHermitian(residual.as_f64()));
        }
        let h_sparse = hamiltonian.to_sparse();
        let s_sparse = symmetry_op.to_sparse();
        Ok(CostConfig {
            weights,
            target_energy,
            hamiltonian,
            symmetry_op,
            symmetry_value,
            h_sparse,
            s_sparse,
        })
    }

    /// Same operators, different target energy (reuses the compiled forms).
    pub fn with_target(&self, target_energy: T) -> Self {
        CostConfig {
            target_energy,
            ..self.clone()
        }
    }

    pub fn weights(&self) -> CostWeights {
        self.weights
    }

    pub fn target_energy(&self) -> T {
        self.target_energy
    }

    pub fn hamiltonian(&self) -> &PauliOperator<T> {
        &self.hamiltonian
    }

    pub fn symmetry_op(&self) -> &PauliOperator<T> {
        &self.symmetry_op
    }

    pub fn symmetry_value(&self) -> T {
        self.symmetry_value
    }

    pub fn hamiltonian_sparse(&self) -> &SparseOperator<T> {
        &self.h_sparse
    }

    pub fn num_qubits(&self) -> usize {
        self.hamiltonian.num_qubits()
    }

    /// Cost and its pieces for a prepared state.
    pub fn breakdown(&self, state: &Statevector<T>) -> Result<CostBreakdown<T>> {
        if state.num_qubits() != self.num_qubits() {
            return Err(Error::SizeMismatch {
                expected: self.num_qubits(),
                found: state.num_qubits(),
            });
        }
        let obs = self.observables(state.amplitudes());
        Ok(self.breakdown_from(&obs))
    }

    fn breakdown_from(&self, obs: &[T]) -> CostBreakdown<T> {
        let [h, h2, s, s2] = [obs[0], obs[1], obs[2], obs[3]];
        let e = self.target_energy;
        let sv = self.symmetry_value;
        let two = T::lit(2.0);
        // Clamp tiny negative round-off; each term is a non-negative quadratic form.
        let energy_distance = (h2 - two * e * h + e * e).max(T::zero());
        let variance = (h2 - h * h).max(T::zero());
        let f_symm = (s2 - two * sv * s + sv * sv).max(T::zero());
        let energy_term = T::lit(self.weights.a) * energy_distance;
        let variance_term = T::lit(self.weights.b) * variance;
        let symm_term = T::lit(self.weights.c) * f_symm;
        CostBreakdown {
            cost: energy_term + variance_term + symm_term,
            energy_term,
            variance_term,
            symm_term,
            energy: h,
            variance,
            f_symm,
            symmetry: s,
        }
    }
}

/// Value of the cost and of each weighted term, plus the raw diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CostBreakdown<T: Real = f64> {
    pub cost: T,
    pub energy_term: T,
    pub variance_term: T,
    pub symm_term: T,
    /// `<H>`
    pub energy: T,
    /// `<H^2> - <H>^2`
    pub variance: T,
    /// `<(S - s)^2>`
    pub f_symm: T,
    /// `<S>`
    pub symmetry: T,
}

/// A cost that is a smooth function of a few expectation values.
///
/// Gradients only need the expectation values themselves, the partial
/// derivatives of the cost with respect to them, and the ability to apply the
/// correspondingly weighted sum of observables to a state.
pub trait Objective<T: Real>: Sync {
    fn num_qubits(&self) -> usize;

    /// Expectation values the cost depends on.
    fn observables(&self, amps: &[C<T>]) -> Vec<T>;

    fn cost_from(&self, obs: &[T]) -> T;

    /// `d cost / d obs_k`.
    fn cost_partials(&self, obs: &[T]) -> Vec<T>;

    /// `sum_k weights_k O_k |amps>`.
    fn weighted_apply(&self, weights: &[T], amps: &[C<T>]) -> Vec<C<T>>;

    /// Optional per-iteration diagnostics `(energy, variance, f_symm)`.
    fn diagnostics(&self, _obs: &[T]) -> Option<(T, T, T)> {
        None
    }

    /// Configuration echo for run records.
    fn describe(&self) -> serde_json::Value;
}

impl<T: Real> Objective<T> for CostConfig<T> {
    fn num_qubits(&self) -> usize {
        self.hamiltonian.num_qubits()
    }

    fn observables(&self, amps: &[C<T>]) -> Vec<T> {
        let hpsi = self.h_sparse.apply_vec(amps);
        let h = inner(amps, &hpsi).re;
        let h2: T = hpsi.iter().map(|a| a.norm_sqr()).sum();
        let spsi = self.s_sparse.apply_vec(amps);
        let s = inner(amps, &spsi).re;
        let s2: T = spsi.iter().map(|a| a.norm_sqr()).sum();
        vec![h, h2, s, s2]
    }

    fn cost_from(&self, obs: &[T]) -> T {
        self.breakdown_from(obs).cost
    }

    fn cost_partials(&self, obs: &[T]) -> Vec<T> {
        let (a, b, c) = (
            T::lit(self.weights.a),
            T::lit(self.weights.b),
            T::lit(self.weights.c),
        );
        let two = T::lit(2.0);
        let h = obs[0];
        vec![
            -two * a * self.target_energy - two * b * h,
            a + b,
            -two * c * self.symmetry_value,
            c,
        ]
    }

    fn weighted_apply(&self, w: &[T], amps: &[C<T>]) -> Vec<C<T>> {
        let hpsi = self.h_sparse.apply_vec(amps);
        let hhpsi = self.h_sparse.apply_vec(&hpsi);
        let spsi = self.s_sparse.apply_vec(amps);
        let sspsi = self.s_sparse.apply_vec(&spsi);
        (0..amps.len())
            .map(|i| hpsi[i] * w[0] + hhpsi[i] * w[1] + spsi[i] * w[2] + sspsi[i] * w[3])
            .collect()
    }

    fn diagnostics(&self, obs: &[T]) -> Option<(T, T, T)> {
        let b = self.breakdown_from(obs);
        Some((b.energy, b.variance, b.f_symm))
    }

    fn describe(&self) -> serde_json::Value {
        json!({
            "objective": "vqe-s",
            "weights": self.weights,
            "target_energy": self.target_energy.as_f64(),
            "symmetry_value": self.symmetry_value.as_f64(),
            "hamiltonian_terms": self.hamiltonian.len(),
            "num_qubits": self.num_qubits(),
        })
    }
}

/// `1 - |<target|psi>|^2`; needs the target state in advance.
#[derive(Clone, Debug)]
pub struct InfidelityObjective<T: Real = f64> {
    target: Statevector<T>,
}

impl<T: Real> InfidelityObjective<T> {
    pub fn new(target: Statevector<T>) -> Self {
        InfidelityObjective {
            target: target.normalized(),
        }
    }

    pub fn target(&self) -> &Statevector<T> {
        &self.target
    }
}

impl<T: Real> Objective<T> for InfidelityObjective<T> {
    fn num_qubits(&self) -> usize {
        self.target.num_qubits()
    }

    fn observables(&self, amps: &[C<T>]) -> Vec<T> {
        vec![inner(self.target.amplitudes(), amps).norm_sqr()]
    }

    fn cost_from(&self, obs: &[T]) -> T {
        T::one() - obs[0]
    }

    fn cost_partials(&self, _obs: &[T]) -> Vec<T> {
        vec![-T::one()]
    }

    fn weighted_apply(&self, w: &[T], amps: &[C<T>]) -> Vec<C<T>> {
        let overlap = inner(self.target.amplitudes(), amps) * w[0];
        self.target.amplitudes().iter().map(|t| t * overlap).collect()
    }

    fn describe(&self) -> serde_json::Value {
        json!({ "objective": "infidelity", "num_qubits": self.num_qubits() })
    }
}

/// Cost of `circuit(params)|initial>` and its components.
pub fn cost<T: Real>(
    circuit: &Circuit,
    params: &[T],
    cfg: &CostConfig<T>,
    initial: &Statevector<T>,
) -> Result<CostBreakdown<T>> {
    let state = circuit.run(params, initial)?;
    cfg.breakdown(&state)
}
