use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{Circuit, ParamVector};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::statevector::{inner, Statevector};
use crate::vqe::adam::Adam;
use crate::vqe::cost::{CostConfig, Objective};
use crate::vqe::gradient::{adjoint_from_output, parameter_shift_gradient, GradientMethod};

/// Optimizer settings for one training run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    /// Initial parameters are drawn uniformly from `[-init_epsilon, init_epsilon]`.
    pub init_epsilon: f64,
    pub rng_seed: u64,
    pub gradient: GradientMethod,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            iterations: 1000,
            learning_rate: 0.01,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            init_epsilon: 0.01,
            rng_seed: 0,
            gradient: GradientMethod::default(),
        }
    }
}

impl TrainConfig {
    pub fn with_iterations(iterations: usize) -> Self {
        TrainConfig {
            iterations,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidTrainConfig(msg));
        if self.iterations == 0 {
            return bad("iterations must be at least 1".into());
        }
        for (name, beta) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(beta > 0.0 && beta < 1.0) {
                return bad(format!("{name} must lie in (0, 1), got {beta}"));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !(self.adam_eps > 0.0 && self.adam_eps.is_finite()) {
            return bad(format!("adam_eps must be positive, got {}", self.adam_eps));
        }
        if !(self.init_epsilon >= 0.0 && self.init_epsilon.is_finite()) {
            return bad(format!("init_epsilon must be non-negative, got {}", self.init_epsilon));
        }
        Ok(())
    }

    /// Uniform draw in `[-init_epsilon, init_epsilon]` from `rng_seed`.
    pub fn initial_params<T: Real>(&self, num_params: usize) -> ParamVector<T> {
        if self.init_epsilon == 0.0 {
            return ParamVector::zeros(num_params);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        let eps = self.init_epsilon;
        ParamVector(
            (0..num_params)
                .map(|_| T::lit(rng.random_range(-eps..=eps)))
                .collect(),
        )
    }
}

/// Per-iteration history of a training run.
///
/// Every series has `iterations + 1` entries: the initial point and the state
/// after each optimizer step. Series the objective cannot supply are empty.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Real")]
pub struct RunRecord<T: Real = f64> {
    pub config: TrainConfig,
    pub objective: serde_json::Value,
    pub cost: Vec<T>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub energy: Vec<T>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub variance: Vec<T>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub f_symm: Vec<T>,
    /// Fidelity with the probe state, when one was given.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fidelity: Vec<T>,
    pub final_params: ParamVector<T>,
    #[serde(skip)]
    pub final_state: Statevector<T>,
}

impl<T: Real> RunRecord<T> {
    pub fn final_cost(&self) -> T {
        *self.cost.last().expect("series always holds the initial point")
    }

    pub fn final_energy(&self) -> Option<T> {
        self.energy.last().copied()
    }

    pub fn final_fidelity(&self) -> Option<T> {
        self.fidelity.last().copied()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("run records always serialize")
    }
}

/// A training run that stopped early; `partial` holds the history so far.
#[derive(Clone, Debug)]
pub struct TrainFailure<T: Real = f64> {
    pub error: Error,
    pub partial: Option<Box<RunRecord<T>>>,
}

impl<T: Real> fmt::Display for TrainFailure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.error.fmt(f)
    }
}

impl<T: Real> std::error::Error for TrainFailure<T> {}

impl<T: Real> From<Error> for TrainFailure<T> {
    fn from(error: Error) -> Self {
        TrainFailure {
            error,
            partial: None,
        }
    }
}

impl<T: Real> From<TrainFailure<T>> for Error {
    fn from(f: TrainFailure<T>) -> Self {
        f.error
    }
}

/// Minimizes the scar-targeting cost with Adam.
pub fn train<T: Real>(
    circuit: &Circuit,
    cfg: &CostConfig<T>,
    tcfg: &TrainConfig,
    initial: &Statevector<T>,
) -> Result<RunRecord<T>, TrainFailure<T>> {
    train_objective(circuit, cfg, tcfg, initial, None)
}

/// Minimizes any [`Objective`]; if `probe` is given its fidelity with the
/// prepared state is recorded at every iteration.
pub fn train_objective<T: Real, O: Objective<T> + ?Sized>(
    circuit: &Circuit,
    objective: &O,
    tcfg: &TrainConfig,
    initial: &Statevector<T>,
    probe: Option<&Statevector<T>>,
) -> Result<RunRecord<T>, TrainFailure<T>> {
    tcfg.validate()?;
    let n = circuit.num_qubits();
    for found in [objective.num_qubits(), initial.num_qubits()]
        .into_iter()
        .chain(probe.map(Statevector::num_qubits))
    {
        if found != n {
            return Err(Error::SizeMismatch { expected: n, found }.into());
        }
    }
    let probe = probe.map(|p| p.clone().normalized());
    let compiled = circuit.compile();
    let mut params = tcfg.initial_params::<T>(circuit.num_params()).0;
    let mut adam = Adam::new(
        params.len(),
        T::lit(tcfg.learning_rate),
        T::lit(tcfg.adam_beta1),
        T::lit(tcfg.adam_beta2),
        T::lit(tcfg.adam_eps),
    );

    let len = tcfg.iterations + 1;
    let mut record = RunRecord {
        config: *tcfg,
        objective: objective.describe(),
        cost: Vec::with_capacity(len),
        energy: Vec::with_capacity(len),
        variance: Vec::with_capacity(len),
        f_symm: Vec::with_capacity(len),
        fidelity: Vec::with_capacity(len),
        final_params: ParamVector::zeros(0),
        final_state: initial.clone(),
    };

    let mut iteration = 0;
    loop {
        let mut phi = initial.amplitudes().to_vec();
        compiled.run_in_place(&params, &mut phi, None);
        if let Some(p) = &probe {
            record.fidelity.push(inner(p.amplitudes(), &phi).norm_sqr());
        }
        let last = iteration == tcfg.iterations;
        let (grad, obs) = if last {
            (Vec::new(), objective.observables(&phi))
        } else {
            match tcfg.gradient {
                GradientMethod::Adjoint => adjoint_from_output(&compiled, &params, phi.clone(), objective),
                GradientMethod::ParameterShift => {
                    let g = parameter_shift_gradient(&compiled, &params, objective, initial)?;
                    (g, objective.observables(&phi))
                }
            }
        };
        let c = objective.cost_from(&obs);
        record.cost.push(c);
        if let Some((e, var, fs)) = objective.diagnostics(&obs) {
            record.energy.push(e);
            record.variance.push(var);
            record.f_symm.push(fs);
        }
        let finite = c.is_finite() && grad.iter().all(|g| g.is_finite());
        if last || !finite {
            record.final_params = ParamVector(params.clone());
            record.final_state =
                Statevector::from_amplitudes(phi).expect("circuit preserves the dimension");
            if !finite {
                return Err(TrainFailure {
                    error: Error::NonFiniteCost { iteration },
                    partial: Some(Box::new(record)),
                });
            }
            return Ok(record);
        }
        adam.step(&mut params, &grad);
        iteration += 1;
    }
}
