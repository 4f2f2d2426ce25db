use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scarhunt::ansatz::{build_ansatz, bulk_embed, AnsatzKind, AnsatzSpec, Circuit};
use scarhunt::operators::{symmetry_operator, SectorSpec};
use scarhunt::statevector::{BipartitionSpec, GateKind, Statevector};

const KINDS: [AnsatzKind; 3] = [
    AnsatzKind::AllToAll,
    AnsatzKind::NearestNeighbor,
    AnsatzKind::HardwareEfficient,
];

fn circuit(kind: AnsatzKind, n: usize, d: usize) -> Circuit {
    build_ansatz(&AnsatzSpec::new(kind, n, d).unwrap()).unwrap()
}

fn random_params(len: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-3.2..3.2)).collect()
}

/// CZ gates whose targets sit on opposite sides of the half-chain cut.
fn crossing_cz(c: &Circuit) -> usize {
    let half = c.num_qubits() / 2;
    c.gates()
        .iter()
        .filter(|g| g.kind() == GateKind::Cz)
        .filter(|g| (g.targets()[0] < half) != (g.targets()[1] < half))
        .count()
}

#[test]
fn full_size_parameter_counts() {
    let nn = AnsatzSpec::new(AnsatzKind::NearestNeighbor, 12, 10).unwrap();
    let he = AnsatzSpec::new(AnsatzKind::HardwareEfficient, 12, 2).unwrap();
    assert_eq!(nn.num_params(), 132);
    assert_eq!(he.num_params(), 96);
    let ratio = he.num_params() as f64 / nn.num_params() as f64;
    assert!((ratio - 1.0).abs() <= 0.28, "{ratio}");
    assert_eq!(AnsatzSpec::new(AnsatzKind::AllToAll, 12, 10).unwrap().num_params(), 132);
}

#[test]
fn slots_cover_the_parameter_vector_in_first_use_order() {
    for kind in KINDS {
        for (n, d) in [(2, 0), (4, 1), (7, 3), (12, 2)] {
            let spec = AnsatzSpec::new(kind, n, d).unwrap();
            let c = build_ansatz(&spec).unwrap();
            assert_eq!(c, build_ansatz(&spec).unwrap());
            assert_eq!(c.num_params(), spec.num_params());
            let mut next = 0;
            for g in c.gates() {
                if let Some(s) = g.param_slot() {
                    assert!(s <= next, "{kind:?} slot {s} before {next}");
                    if s == next {
                        next += 1;
                    }
                }
            }
            assert_eq!(next, spec.num_params());
        }
    }
}

#[test]
fn zero_angles_leave_the_vacuum_alone() {
    for kind in KINDS {
        let c = circuit(kind, 6, 3);
        let out = c.run(&vec![0.0; c.num_params()], &Statevector::zero(6)).unwrap();
        assert_eq!(out, Statevector::zero(6));
    }
}

#[test]
fn hardware_efficient_entanglement_ceiling() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for (n, d) in [(6, 1), (8, 2), (10, 3)] {
        let c = circuit(AnsatzKind::HardwareEfficient, n, d);
        let bound = crossing_cz(&c) as f64 * std::f64::consts::LN_2;
        assert_eq!(crossing_cz(&c), d);
        let cut = BipartitionSpec::half_chain(n);
        let mut largest: f64 = 0.0;
        for _ in 0..100 {
            let out = c.run(&random_params(c.num_params(), &mut rng), &Statevector::zero(n)).unwrap();
            let s = out.entanglement_entropy(&cut).unwrap();
            assert!(s <= bound + 1e-10, "S = {s} above {bound}");
            largest = largest.max(s);
        }
        // The bound is approached, not vacuous.
        assert!(largest > 0.5 * bound);
    }
}

#[test]
fn bulk_embedding_fixes_the_edges() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 8;
    let ndw = symmetry_operator::<f64>(&SectorSpec::domain_walls(0, None), n).unwrap();
    for kind in KINDS {
        let inner = circuit(kind, n - 2, 2);
        for edge in [0u8, 1] {
            let c = bulk_embed(&inner, n, edge).unwrap();
            assert_eq!(c.num_params(), inner.num_params());
            for g in c.gates() {
                if g.targets().iter().any(|&q| q == 0 || q == n - 1) {
                    assert_eq!(g.kind(), GateKind::X);
                }
            }
            let theta = random_params(c.num_params(), &mut rng);
            let out = c.run(&theta, &Statevector::zero(n)).unwrap();
            let e = edge == 1;
            for (i, a) in out.amplitudes().iter().enumerate() {
                let edges_ok = ((i & 1 == 1) == e) && ((i >> (n - 1) & 1 == 1) == e);
                if !edges_ok {
                    assert_eq!(a.norm(), 0.0);
                }
            }
        }
        let he = bulk_embed(&circuit(AnsatzKind::HardwareEfficient, n - 2, 1), n, 0).unwrap();
        let at_zero = he.run(&vec![0.0; he.num_params()], &Statevector::zero(n)).unwrap();
        assert_eq!(at_zero.expectation(&ndw).unwrap(), 0.0);
    }
    assert!(bulk_embed(&circuit(AnsatzKind::NearestNeighbor, 5, 1), n, 0).is_err());
}
