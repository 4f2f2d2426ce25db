use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scarhunt::ansatz::{build_ansatz, AnsatzKind, AnsatzSpec, Circuit};
use scarhunt::operators::{
    build_h1, build_h2, scar_state_h1, symmetry_operator, H1Params, H2Params, Pauli,
    PauliOperator, SectorSpec,
};
use scarhunt::statevector::{Gate, Statevector};
use scarhunt::vqe::{
    adjoint_gradient, cost, gradient, train, train_objective, CostConfig, CostWeights,
    GradientMethod, InfidelityObjective, Objective, TrainConfig,
};

fn random_weights(rng: &mut ChaCha8Rng) -> CostWeights {
    let raw: Vec<f64> = (0..3).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    let a = raw[0] / s;
    let b = raw[1] / s;
    CostWeights::new(a, b, 1.0 - a - b).unwrap()
}

fn h1_cost(n: usize, seed: u64, weights: CostWeights, target: f64) -> CostConfig {
    let p = H1Params::new(n, -2.5, 0.5, seed).unwrap();
    let h = build_h1(&p).unwrap();
    let s = symmetry_operator(&SectorSpec::bosons(n / 2), n).unwrap();
    CostConfig::new(weights, target, h, s, (n / 2) as f64).unwrap()
}

fn h2_cost(n: usize, weights: CostWeights, target: f64, n_dw: usize) -> CostConfig {
    let h = build_h2(&H2Params::new(n, 1.0, 0.1, 1.0).unwrap()).unwrap();
    let s = symmetry_operator(&SectorSpec::domain_walls(n_dw, None), n).unwrap();
    CostConfig::new(weights, target, h, s, n_dw as f64).unwrap()
}

fn finite_difference(
    circuit: &Circuit,
    params: &[f64],
    cfg: &CostConfig,
    initial: &Statevector,
    h: f64,
) -> Vec<f64> {
    (0..params.len())
        .map(|k| {
            let mut p = params.to_vec();
            p[k] += h;
            let plus = cost(circuit, &p, cfg, initial).unwrap().cost;
            p[k] -= 2.0 * h;
            let minus = cost(circuit, &p, cfg, initial).unwrap().cost;
            (plus - minus) / (2.0 * h)
        })
        .collect()
}

fn assert_close_rel(a: &[f64], b: &[f64], rel: f64, abs_floor: f64) {
    let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(abs_floor);
    for (k, (x, y)) in a.iter().zip(b).enumerate() {
        assert!(
            (x - y).abs() <= rel * scale,
            "component {k}: {x} vs {y} (scale {scale})"
        );
    }
}

#[test]
fn single_qubit_hand_calculation() {
    let circuit = Circuit::new(1, vec![Gate::ry(0, 0)]).unwrap();
    let z = PauliOperator::single(1, 0, Pauli::Z, 1.0);
    let s = PauliOperator::identity(1);
    let cfg = CostConfig::new(CostWeights::new(1.0, 0.0, 0.0).unwrap(), -1.0, z, s, 1.0).unwrap();
    let initial = Statevector::zero(1);
    for theta in [0.0, 0.4, 1.3, std::f64::consts::FRAC_PI_2, 2.9] {
        // <(Z + 1)^2> = 2 + 2 cos(theta) since Z^2 = 1
        let c = cost(&circuit, &[theta], &cfg, &initial).unwrap();
        let expected = 2.0 + 2.0 * theta.cos();
        assert!((c.cost - expected).abs() < 1e-13, "{} vs {}", c.cost, expected);
        let g = gradient(&circuit, &[theta], &cfg, &initial).unwrap();
        let expected = -2.0 * theta.sin();
        assert!((g[0] - expected).abs() < 1e-13, "{} vs {}", g[0], expected);
    }
    let g = gradient(&circuit, &[std::f64::consts::FRAC_PI_2], &cfg, &initial).unwrap();
    assert!((g[0] + 2.0).abs() < 1e-13);
}

#[test]
fn parameter_shift_matches_finite_differences_on_all_ansatz_kinds() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 6;
    for (i, kind) in [
        AnsatzKind::HardwareEfficient,
        AnsatzKind::NearestNeighbor,
        AnsatzKind::AllToAll,
    ]
    .into_iter()
    .enumerate()
    {
        let circuit = build_ansatz(&AnsatzSpec::new(kind, n, 2).unwrap()).unwrap();
        let params: Vec<f64> = (0..circuit.num_params())
            .map(|_| rng.random_range(-3.0..3.0))
            .collect();
        let weights = random_weights(&mut rng);
        let cfg = if i % 2 == 0 {
            h1_cost(n, 5 + i as u64, weights, rng.random_range(-20.0..20.0))
        } else {
            h2_cost(n, weights, rng.random_range(-5.0..5.0), 2)
        };
        let initial = Statevector::zero(n);
        let ps = gradient(&circuit, &params, &cfg, &initial).unwrap();
        let fd = finite_difference(&circuit, &params, &cfg, &initial, 1e-5);
        assert_close_rel(&ps, &fd, 1e-6, 1e-3);
        let (adj, _) = adjoint_gradient(&circuit.compile(), &params, &cfg, &initial).unwrap();
        assert_close_rel(&adj, &ps, 1e-10, 1e-6);
    }
}

#[test]
fn adjoint_gradient_of_infidelity_matches_shift_rule() {
    let n = 4;
    let circuit = build_ansatz(&AnsatzSpec::new(AnsatzKind::HardwareEfficient, n, 1).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let params: Vec<f64> = (0..circuit.num_params())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let target = circuit
        .run(
            &(0..circuit.num_params())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect::<Vec<_>>(),
            &Statevector::zero(n),
        )
        .unwrap();
    let objective = InfidelityObjective::new(target);
    let compiled = circuit.compile();
    let initial = Statevector::zero(n);
    let (adj, obs) = adjoint_gradient(&compiled, &params, &objective, &initial).unwrap();
    let ps = scarhunt::vqe::parameter_shift_gradient(&compiled, &params, &objective, &initial)
        .unwrap();
    assert_close_rel(&adj, &ps, 1e-12, 1e-6);
    assert!(objective.cost_from(&obs) >= 0.0);
}

#[test]
fn infidelity_vanishes_at_the_target_parameters() {
    let n = 4;
    let circuit = build_ansatz(&AnsatzSpec::new(AnsatzKind::NearestNeighbor, n, 2).unwrap()).unwrap();
    let params: Vec<f64> = (0..circuit.num_params()).map(|k| 0.1 * k as f64).collect();
    let target = circuit.run(&params, &Statevector::zero(n)).unwrap();
    let objective = InfidelityObjective::new(target);
    let state = circuit.run(&params, &Statevector::zero(n)).unwrap();
    let obs = objective.observables(state.amplitudes());
    assert!(objective.cost_from(&obs).abs() < 1e-14);
}

#[test]
fn scar_state_has_zero_cost() {
    let n = 8;
    let p = H1Params::new(n, -2.5, 0.5, 1).unwrap();
    let scar: Statevector = scar_state_h1(&p).unwrap();
    let h = build_h1(&p).unwrap();
    let e = scar.expectation(&h).unwrap();
    let s = symmetry_operator(&SectorSpec::bosons(n / 2), n).unwrap();
    let cfg = CostConfig::new(CostWeights::standard(), e, h, s, 4.0).unwrap();
    let b = cfg.breakdown(&scar).unwrap();
    assert!(b.cost < 1e-12, "{b:?}");
    assert!((b.symmetry - 4.0).abs() < 1e-12);
}

#[test]
fn pure_energy_term_on_an_eigenstate() {
    // |0...0> is an eigenstate of H2 with energy Delta N + J (N - 1).
    let n = 6;
    let e_prime = 0.1 * 6.0 + 5.0;
    let h = build_h2(&H2Params::new(n, 1.0, 0.1, 1.0).unwrap()).unwrap();
    let s = symmetry_operator(&SectorSpec::domain_walls(0, None), n).unwrap();
    let cfg = CostConfig::new(CostWeights::new(1.0, 0.0, 0.0).unwrap(), 2.0, h, s, 0.0).unwrap();
    let b = cfg.breakdown(&Statevector::zero(n)).unwrap();
    assert!((b.cost - (e_prime - 2.0f64).powi(2)).abs() < 1e-12);
    assert!(b.variance < 1e-12);
}

#[test]
fn squared_energy_matches_squared_operator() {
    let n = 6;
    let cfg = h1_cost(n, 2, CostWeights::standard(), 0.0);
    let circuit = build_ansatz(&AnsatzSpec::new(AnsatzKind::HardwareEfficient, n, 1).unwrap()).unwrap();
    let params: Vec<f64> = (0..circuit.num_params()).map(|k| (k as f64).sin()).collect();
    let state = circuit.run(&params, &Statevector::zero(n)).unwrap();
    let h2 = cfg.hamiltonian().multiply(cfg.hamiltonian()).simplify();
    let direct = state.expectation(&h2).unwrap();
    let obs = cfg.observables(state.amplitudes());
    assert!((obs[1] - direct).abs() < 1e-9 * direct.abs().max(1.0));
}

#[test]
fn weight_constraint_is_enforced() {
    assert!(CostWeights::new(0.5, 0.5, 0.5).is_err());
    assert!(CostWeights::new(1.2, -0.1, -0.1).is_err());
    assert!(CostWeights::new(0.05, 0.25, 0.70).is_ok());
}

#[test]
fn weight_scaling_scales_cost_and_keeps_argmin() {
    let circuit = Circuit::new(1, vec![Gate::ry(0, 0)]).unwrap();
    let x = PauliOperator::single(1, 0, Pauli::X, 0.7) + PauliOperator::single(1, 0, Pauli::Z, -0.4);
    let s = PauliOperator::single(1, 0, Pauli::Z, 1.0);
    let base = CostWeights::new(0.2, 0.3, 0.5).unwrap();
    let lambda = 3.5;
    let scaled = CostWeights {
        a: base.a * lambda,
        b: base.b * lambda,
        c: base.c * lambda,
    };
    let c1 = CostConfig::new(base, 0.1, x.clone(), s.clone(), 0.2).unwrap();
    let c2 = CostConfig::with_unnormalized_weights(scaled, 0.1, x, s, 0.2).unwrap();
    let initial = Statevector::zero(1);
    let mut best = [(f64::INFINITY, 0usize); 2];
    for k in 0..2000 {
        let theta = -std::f64::consts::PI + k as f64 * std::f64::consts::TAU / 2000.0;
        let v1 = cost(&circuit, &[theta], &c1, &initial).unwrap().cost;
        let v2 = cost(&circuit, &[theta], &c2, &initial).unwrap().cost;
        assert!((v2 - lambda * v1).abs() <= 1e-12 * v2.abs().max(1.0));
        for (slot, v) in best.iter_mut().zip([v1, v2]) {
            if v < slot.0 {
                *slot = (v, k);
            }
        }
    }
    assert_eq!(best[0].1, best[1].1);
}

#[test]
fn iteration_count_contract() {
    let n = 4;
    let cfg = h2_cost(n, CostWeights::standard(), 0.0, 2);
    let circuit = build_ansatz(&AnsatzSpec::new(AnsatzKind::NearestNeighbor, n, 1).unwrap()).unwrap();
    let initial = Statevector::zero(n);
    let zero = TrainConfig::with_iterations(0);
    assert!(train(&circuit, &cfg, &zero, &initial).is_err());
    let one = TrainConfig::with_iterations(1);
    let r = train(&circuit, &cfg, &one, &initial).unwrap();
    assert_eq!(r.cost.len(), 2);
    assert_eq!(r.energy.len(), 2);
    assert_eq!(r.variance.len(), 2);
    assert_eq!(r.f_symm.len(), 2);
    assert_eq!(r.final_params.len(), circuit.num_params());
}

#[test]
fn bad_train_configs_are_rejected() {
    let t = TrainConfig {
        adam_beta1: 1.0,
        ..TrainConfig::default()
    };
    assert!(t.validate().is_err());
    let t = TrainConfig {
        adam_beta2: 0.0,
        ..TrainConfig::default()
    };
    assert!(t.validate().is_err());
    let t = TrainConfig {
        learning_rate: -0.1,
        ..TrainConfig::default()
    };
    assert!(t.validate().is_err());
}

#[test]
fn initial_parameters_lie_in_the_epsilon_window() {
    let t = TrainConfig {
        init_epsilon: 0.01,
        rng_seed: 9,
        ..TrainConfig::default()
    };
    let p = t.initial_params::<f64>(500);
    assert!(p.iter().all(|x| x.abs() <= 0.01));
    assert!(p.iter().any(|x| x.abs() > 0.005));
    assert_eq!(p, t.initial_params::<f64>(500));
}

#[test]
fn training_is_seed_deterministic() {
    let n = 6;
    let cfg = h2_cost(n, CostWeights::standard(), 2.0, 2);
    let circuit = build_ansatz(&AnsatzSpec::new(AnsatzKind::HardwareEfficient, n, 1).unwrap()).unwrap();
    let initial = Statevector::zero(n);
    let t = TrainConfig::with_iterations(60).with_seed(4);
    let a = train(&circuit, &cfg, &t, &initial).unwrap();
    let b = train(&circuit, &cfg, &t, &initial).unwrap();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.cost), bits(&b.cost));
    assert_eq!(a.to_json(), b.to_json());
    let c = train(&circuit, &cfg, &t.with_seed(5), &initial).unwrap();
    assert_ne!(bits(&a.cost), bits(&c.cost));
}

#[test]
fn both_gradient_methods_train_identically() {
    let n = 4;
    let cfg = h2_cost(n, CostWeights::standard(), 1.0, 2);
    let circuit = build_ansatz(&AnsatzSpec::new(AnsatzKind::NearestNeighbor, n, 2).unwrap()).unwrap();
    let initial = Statevector::zero(n);
    let mut t = TrainConfig::with_iterations(30).with_seed(1);
    let adj = train(&circuit, &cfg, &t, &initial).unwrap();
    t.gradient = GradientMethod::ParameterShift;
    let ps = train(&circuit, &cfg, &t, &initial).unwrap();
    for (x, y) in adj.cost.iter().zip(&ps.cost) {
        assert!((x - y).abs() < 1e-9 * x.abs().max(1.0));
    }
}

#[test]
fn training_lowers_the_cost_and_reaches_a_tower_state() {
    // Bulk-embedded tower: H2 at N=6, target the k=1 scar (n_dw = 2).
    let n = 6;
    let e1 = 0.1 * (6.0 - 2.0) + (5.0 - 4.0);
    let cfg = h2_cost(n, CostWeights::standard(), e1, 2);
    let circuit = build_ansatz(&AnsatzSpec::new(AnsatzKind::HardwareEfficient, n, 2).unwrap()).unwrap();
    let initial = Statevector::zero(n);
    let t = TrainConfig {
        learning_rate: 0.05,
        ..TrainConfig::with_iterations(400).with_seed(2)
    };
    let r = train(&circuit, &cfg, &t, &initial).unwrap();
    let tenth = r.cost.len() / 10;
    let head: f64 = r.cost[..tenth].iter().sum::<f64>() / tenth as f64;
    let tail: f64 = r.cost[r.cost.len() - tenth..].iter().sum::<f64>() / tenth as f64;
    assert!(tail < head, "{head} -> {tail}");
    assert!(r.final_cost() < r.cost[0]);
}

#[test]
fn probe_fidelity_series_is_recorded() {
    let n = 4;
    let cfg = h2_cost(n, CostWeights::standard(), 0.0, 0);
    let circuit = build_ansatz(&AnsatzSpec::new(AnsatzKind::NearestNeighbor, n, 1).unwrap()).unwrap();
    let initial = Statevector::zero(n);
    let t = TrainConfig::with_iterations(5);
    let r = train_objective(&circuit, &cfg, &t, &initial, Some(&initial)).unwrap();
    assert_eq!(r.fidelity.len(), 6);
    assert!((r.fidelity[0] - 1.0).abs() < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cost_is_non_negative(
        seed in 0u64..1000,
        target in -50.0f64..50.0,
        wa in 0.0f64..1.0,
        wb in 0.0f64..1.0,
    ) {
        let (a, b) = if wa + wb > 1.0 { (wa / 2.0, wb / 2.0) } else { (wa, wb) };
        let weights = CostWeights::new(a, b, 1.0 - a - b).unwrap();
        let cfg = h1_cost(4, 1, weights, target);
        let circuit = build_ansatz(&AnsatzSpec::new(AnsatzKind::HardwareEfficient, 4, 1).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params: Vec<f64> = (0..circuit.num_params()).map(|_| rng.random_range(-3.2..3.2)).collect();
        let b = cost(&circuit, &params, &cfg, &Statevector::zero(4)).unwrap();
        prop_assert!(b.cost >= 0.0);
        prop_assert!(b.energy_term >= 0.0 && b.variance_term >= 0.0 && b.symm_term >= 0.0);
        prop_assert!((b.cost - b.energy_term - b.variance_term - b.symm_term).abs() < 1e-9 * b.cost.max(1.0));
    }
}
