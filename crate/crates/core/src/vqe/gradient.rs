use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::ansatz::{apply_phase, Circuit, CompiledCircuit, CompiledOp};
use crate::error::{Error, Result};
use crate::scalar::{Real, C};
use crate::statevector::{apply_gate_kernel, pauli_matrix_element, Statevector};
use crate::vqe::cost::{CostConfig, Objective};

/// How training computes gradients. Both are exact for Pauli-rotation circuits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMethod {
    /// Two shifted circuit evaluations (`+-pi/2`) per rotation gate.
    ParameterShift,
    /// One forward and one backward sweep (reverse-mode differentiation).
    #[default]
    Adjoint,
}

fn check_inputs<T: Real, O: Objective<T> + ?Sized>(
    circuit: &Circuit,
    params: &[T],
    objective: &O,
    initial: &Statevector<T>,
) -> Result<()> {
    if params.len() != circuit.num_params() {
        return Err(Error::SizeMismatch {
            expected: circuit.num_params(),
            found: params.len(),
        });
    }
    for n in [objective.num_qubits(), initial.num_qubits()] {
        if n != circuit.num_qubits() {
            return Err(Error::SizeMismatch {
                expected: circuit.num_qubits(),
                found: n,
            });
        }
    }
    Ok(())
}

/// Parameter-shift gradient of `objective` at `params`.
///
/// Every expectation value entering the cost is shifted independently and the
/// results are combined with the cost's partial derivatives (chain rule), so
/// the variance term picks up its `-2<H> d<H>` contribution.
pub fn parameter_shift_gradient<T: Real, O: Objective<T> + ?Sized>(
    compiled: &CompiledCircuit,
    params: &[T],
    objective: &O,
    initial: &Statevector<T>,
) -> Result<Vec<T>> {
    let circuit = compiled.circuit();
    check_inputs(circuit, params, objective, initial)?;
    let mut amps = initial.amplitudes().to_vec();
    compiled.run_in_place(params, &mut amps, None);
    let partials = objective.cost_partials(&objective.observables(&amps));

    let shift = T::lit(FRAC_PI_2);
    let half = T::lit(0.5);
    let mut grad = vec![T::zero(); circuit.num_params()];
    for (index, gate) in circuit.gates().iter().enumerate() {
        let Some(slot) = gate.param_slot() else {
            continue;
        };
        let mut plus = initial.amplitudes().to_vec();
        compiled.run_in_place(params, &mut plus, Some((index, shift)));
        let mut minus = initial.amplitudes().to_vec();
        compiled.run_in_place(params, &mut minus, Some((index, -shift)));
        let obs_plus = objective.observables(&plus);
        let obs_minus = objective.observables(&minus);
        for ((w, p), m) in partials.iter().zip(&obs_plus).zip(&obs_minus) {
            grad[slot] += *w * (*p - *m) * half;
        }
    }
    Ok(grad)
}

/// Reverse-mode gradient; also returns the prepared state's observables.
pub fn adjoint_gradient<T: Real, O: Objective<T> + ?Sized>(
    compiled: &CompiledCircuit,
    params: &[T],
    objective: &O,
    initial: &Statevector<T>,
) -> Result<(Vec<T>, Vec<T>)> {
    let circuit = compiled.circuit();
    check_inputs(circuit, params, objective, initial)?;
    let mut phi = initial.amplitudes().to_vec();
    compiled.run_in_place(params, &mut phi, None);
    Ok(adjoint_from_output(compiled, params, phi, objective))
}

/// Adjoint gradient given the already prepared output amplitudes.
pub(crate) fn adjoint_from_output<T: Real, O: Objective<T> + ?Sized>(
    compiled: &CompiledCircuit,
    params: &[T],
    phi: Vec<C<T>>,
    objective: &O,
) -> (Vec<T>, Vec<T>) {
    let obs = objective.observables(&phi);
    let partials = objective.cost_partials(&obs);
    let grad = backward_sweep(compiled, params, phi, objective, &partials);
    (grad, obs)
}

fn backward_sweep<T: Real, O: Objective<T> + ?Sized>(
    compiled: &CompiledCircuit,
    params: &[T],
    mut phi: Vec<C<T>>,
    objective: &O,
    partials: &[T],
) -> Vec<T> {
    let circuit = compiled.circuit();
    let mut lambda = objective.weighted_apply(partials, &phi);
    let mut grad = vec![T::zero(); circuit.num_params()];
    for op in compiled.ops().iter().rev() {
        match op {
            CompiledOp::Phase(negate) => {
                apply_phase(&mut phi, negate);
                apply_phase(&mut lambda, negate);
            }
            CompiledOp::Gate(index) => {
                let gate = &circuit.gates()[*index];
                let angle = gate.param_slot().map_or(T::zero(), |s| params[s]);
                if let (Some(slot), Some(p)) = (gate.param_slot(), gate.kind().generator()) {
                    // d/dtheta of exp(-i theta P/2) contributes Im<lambda|P|phi>
                    grad[slot] += pauli_matrix_element(&lambda, &phi, gate.targets()[0], p).im;
                }
                apply_gate_kernel(&mut phi, gate, -angle);
                apply_gate_kernel(&mut lambda, gate, -angle);
            }
        }
    }
    grad
}

/// Parameter-shift gradient of the scar-targeting cost.
pub fn gradient<T: Real>(
    circuit: &Circuit,
    params: &[T],
    cfg: &CostConfig<T>,
    initial: &Statevector<T>,
) -> Result<Vec<T>> {
    parameter_shift_gradient(&circuit.compile(), params, cfg, initial)
}
