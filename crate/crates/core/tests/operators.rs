use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scarhunt::operators::{
    build_h1, build_h2, inversion_operator, scar_tower_h2, symmetry_operator, EdgeConfig,
    H1Params, H2Params, Pauli, PauliOperator, PauliString, SectorSpec, Tower,
};
use scarhunt::statevector::Statevector;

type M = DMatrix<Complex64>;

fn dense(op: &PauliOperator) -> M {
    let d = 1 << op.num_qubits();
    M::from_column_slice(d, d, &op.to_dense())
}

fn max_abs(m: &M) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn bit(i: usize, q: usize) -> bool {
    (i >> q) & 1 == 1
}

/// H1 on the Fock basis, term by term from the second-quantized form, with
/// the couplings computed here from the clean lattice.
fn h1_brute_force(n: usize, alpha: f64) -> M {
    let z: Vec<Complex64> = (1..=n)
        .map(|j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / n as f64))
        .collect();
    let w = |i: usize, j: usize| (z[i] + z[j]) / (z[i] - z[j]);
    let d = 1 << n;
    let mut h = M::zeros(d, d);
    // |i> with bit q set means site q occupied.
    for s in 0..d {
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                // G^A d_i^dag d_j
                if bit(s, j) && !bit(s, i) {
                    let t = s ^ (1 << j) ^ (1 << i);
                    h[(t, s)] += -2.0 * w(i, j) * w(i, j);
                }
                // G^B n_i n_j
                if bit(s, i) && bit(s, j) {
                    let mut g = (2.0 - alpha) * w(i, j) * w(i, j);
                    for l in (0..n).filter(|&l| l != i && l != j) {
                        g += 4.0 * w(i, j) * w(i, l);
                    }
                    h[(s, s)] += g;
                }
                // G^C d_i^dag d_l n_j
                for l in (0..n).filter(|&l| l != i && l != j) {
                    if bit(s, j) && bit(s, l) && !bit(s, i) {
                        let t = s ^ (1 << l) ^ (1 << i);
                        h[(t, s)] += -alpha * w(j, i) * w(j, l);
                    }
                }
            }
            if bit(s, i) {
                let mut g = Complex64::new(0.0, 0.0);
                for j in (0..n).filter(|&j| j != i) {
                    g -= 2.0 * w(i, j) * w(i, j);
                    for l in (0..n).filter(|&l| l != i && l != j) {
                        g -= w(i, j) * w(i, l);
                    }
                }
                h[(s, s)] += g;
            }
        }
        let nf = n as f64;
        h[(s, s)] += -nf * (nf - 2.0) * (nf - 4.0) / 6.0;
    }
    h
}

#[test]
fn h1_matches_second_quantized_construction() {
    for alpha in [-2.5, 0.0, 1.3] {
        let p = H1Params::new(4, alpha, 0.0, 0).unwrap();
        let got = dense(&build_h1(&p).unwrap());
        let want = h1_brute_force(4, alpha);
        assert!(max_abs(&(got - want)) < 1e-12, "alpha = {alpha}");
    }
}

#[test]
fn h1_is_real_and_hermitian() {
    for seed in 0..4 {
        let p = H1Params::new(6, -2.5, 0.5, seed).unwrap();
        let h = dense(&build_h1(&p).unwrap());
        assert!(max_abs(&(&h - h.adjoint())) < 1e-12);
        assert!(h.iter().all(|z| z.im.abs() < 1e-12));
    }
}

/// H2 on basis states: X flips a spin, Z reads +1 on |0>.
fn h2_brute_force(n: usize, lambda: f64, delta: f64, coupling: f64) -> M {
    let d = 1 << n;
    let zv = |s: usize, q: usize| if bit(s, q) { -1.0 } else { 1.0 };
    let mut h = M::zeros(d, d);
    for s in 0..d {
        for i in 0..n {
            // Spin flips act on the bulk only; the edges are conserved.
            if i > 0 && i + 1 < n {
                let t = s ^ (1 << i);
                h[(t, s)] += lambda * (1.0 - zv(s, i - 1) * zv(s, i + 1));
            }
            h[(s, s)] += delta * zv(s, i);
            if i + 1 < n {
                h[(s, s)] += coupling * zv(s, i) * zv(s, i + 1);
            }
        }
    }
    h
}

fn commutator(a: &M, b: &M) -> M {
    a * b - b * a
}

#[test]
fn h2_matches_direct_construction_and_conserves_walls() {
    let n = 6;
    let p = H2Params::new(n, 1.0, 0.1, 1.0).unwrap();
    let op = build_h2(&p).unwrap();
    let h = dense(&op);
    assert!(max_abs(&(&h - h2_brute_force(n, 1.0, 0.1, 1.0))) < 1e-12);
    assert!(max_abs(&(&h - h.adjoint())) < 1e-12);
    for q in [0, n - 1] {
        let zq = dense(&PauliOperator::single(n, q, Pauli::Z, 1.0));
        assert!(max_abs(&commutator(&h, &zq)) < 1e-12, "edge {q}");
    }
    let ndw = dense(&symmetry_operator(&SectorSpec::domain_walls(0, None), n).unwrap());
    assert!(max_abs(&commutator(&h, &ndw)) < 1e-12);
    // A bulk spin is not conserved.
    let z2 = dense(&PauliOperator::single(n, 2, Pauli::Z, 1.0));
    assert!(max_abs(&commutator(&h, &z2)) > 0.1);
}

#[test]
fn domain_walls_of_a_kink() {
    // |000111> with qubit 0 rightmost: sites 0..2 are 1, sites 3..5 are 0.
    let ndw = symmetry_operator::<f64>(&SectorSpec::domain_walls(0, None), 6).unwrap();
    let psi = Statevector::basis(6, 0b000111).unwrap();
    assert!((psi.expectation(&ndw).unwrap() - 1.0).abs() < 1e-15);
    let nb = symmetry_operator::<f64>(&SectorSpec::bosons(0), 8).unwrap();
    let alt = Statevector::basis(8, 0b10101010).unwrap();
    assert!((alt.expectation(&nb).unwrap() - 4.0).abs() < 1e-15);
}

#[test]
fn simplify_preserves_the_matrix() {
    let h = build_h1::<f64>(&H1Params::new(6, -2.5, 0.5, 9).unwrap()).unwrap();
    // Split every term in two and add a cancelling pair.
    let mut terms = Vec::new();
    for t in h.terms() {
        let half = t.coefficient() * 0.5;
        terms.push(t.with_coefficient(half));
        terms.push(t.with_coefficient(half));
    }
    terms.push(PauliString::real(0.7, &[(1, Pauli::Y), (4, Pauli::Y)]));
    terms.push(PauliString::real(-0.7, &[(1, Pauli::Y), (4, Pauli::Y)]));
    let raw = PauliOperator::from_terms(6, terms).unwrap();
    assert!(max_abs(&(dense(&raw) - dense(&h))) < 1e-12);
    let simple = raw.simplify();
    assert_eq!(simple.len(), h.len());
    assert!(max_abs(&(dense(&simple) - dense(&raw))) < 1e-12);
}

fn random_sector_state(n: usize, sector: &SectorSpec, rng: &mut impl Rng) -> Statevector {
    let amps = (0..1usize << n)
        .map(|i| {
            if sector.contains(i, n) {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Statevector::from_amplitudes(amps).unwrap().normalized()
}

fn outside_weight(psi: &Statevector, sector: &SectorSpec) -> f64 {
    let n = psi.num_qubits();
    psi.amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| !sector.contains(*i, n))
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

#[test]
fn hamiltonians_keep_sectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 8;
    let h1 = build_h1::<f64>(&H1Params::new(n, -2.5, 0.5, 2).unwrap()).unwrap().to_sparse();
    for nb in 0..=n {
        let s = SectorSpec::bosons(nb);
        let out = h1.apply(&random_sector_state(n, &s, &mut rng)).unwrap();
        assert!(outside_weight(&out, &s) < 1e-20 * out.norm_sqr().max(1.0));
    }
    let h2 = build_h2::<f64>(&H2Params::new(n, 1.0, 0.1, 1.0).unwrap()).unwrap().to_sparse();
    for ndw in 0..n {
        for edge in [None, Some(EdgeConfig::AllZero), Some(EdgeConfig::AllOne)] {
            let s = SectorSpec::domain_walls(ndw, edge);
            if s.basis_states(n).map_or(true, |b| b.is_empty()) {
                continue;
            }
            let out = h2.apply(&random_sector_state(n, &s, &mut rng)).unwrap();
            assert!(outside_weight(&out, &s) < 1e-20 * out.norm_sqr().max(1.0));
        }
    }
}

#[test]
fn towers_are_orthogonal_and_mapped_by_inversion() {
    let n = 10;
    let p = H2Params::new(n, 1.0, 0.1, 1.0).unwrap();
    let flip = inversion_operator::<f64>(n);
    let ndw = symmetry_operator::<f64>(&SectorSpec::domain_walls(0, None), n).unwrap();
    let zero: Vec<Statevector> =
        (0..=p.max_tower_index()).map(|k| scar_tower_h2(&p, k, Tower::Zero).unwrap()).collect();
    let one: Vec<Statevector> =
        (0..=p.max_tower_index()).map(|k| scar_tower_h2(&p, k, Tower::One).unwrap()).collect();
    assert_eq!(zero[0], Statevector::zero(n));
    for (k, a) in zero.iter().enumerate() {
        assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((a.expectation(&ndw).unwrap() - 2.0 * k as f64).abs() < 1e-10);
        for b in &zero[k + 1..] {
            assert!(a.inner_product(b).unwrap().norm() < 1e-10);
        }
        let flipped = flip.apply(a).unwrap();
        assert!((flipped.fidelity(&one[k]).unwrap() - 1.0).abs() < 1e-12);
    }
}

fn letter() -> impl Strategy<Value = Option<Pauli>> {
    prop_oneof![Just(None), Just(Some(Pauli::X)), Just(Some(Pauli::Y)), Just(Some(Pauli::Z))]
}

fn string(n: usize) -> impl Strategy<Value = PauliString> {
    (prop::collection::vec(letter(), n), -2.0f64..2.0, -2.0f64..2.0).prop_map(|(ls, re, im)| {
        let factors: Vec<(usize, Pauli)> =
            ls.into_iter().enumerate().filter_map(|(q, l)| l.map(|l| (q, l))).collect();
        PauliString::new(Complex64::new(re, im), &factors)
    })
}

/// Dense matrix of a string from 2x2 Pauli matrices.
fn kron_string(n: usize, s: &PauliString) -> M {
    let c = |re, im| Complex64::new(re, im);
    let o = c(0.0, 0.0);
    let factors = s.factors();
    let mut m = M::identity(1, 1);
    for q in (0..n).rev() {
        let f = match factors.iter().find(|(k, _)| *k == q).map(|(_, p)| *p) {
            None => M::identity(2, 2),
            Some(Pauli::X) => M::from_row_slice(2, 2, &[o, c(1.0, 0.0), c(1.0, 0.0), o]),
            Some(Pauli::Y) => M::from_row_slice(2, 2, &[o, c(0.0, -1.0), c(0.0, 1.0), o]),
            Some(Pauli::Z) => M::from_row_slice(2, 2, &[c(1.0, 0.0), o, o, c(-1.0, 0.0)]),
        };
        m = m.kronecker(&f);
    }
    m * s.coefficient()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn string_products_match_dense((n, a, b) in (1usize..=4).prop_flat_map(|n| (Just(n), string(n), string(n)))) {
        let prod = a.multiply(&b);
        let want = kron_string(n, &a) * kron_string(n, &b);
        prop_assert!(max_abs(&(kron_string(n, &prod) - &want)) < 1e-12);
        let op = PauliOperator::from_terms(n, vec![prod]).unwrap();
        prop_assert!(max_abs(&(dense(&op) - want)) < 1e-12);
    }
}
