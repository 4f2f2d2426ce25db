//! Dense exact diagonalization, optionally restricted to a symmetry sector.

use std::fmt::Write as _;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{
    build_h1, symmetry_operator, H1Params, Model, PauliOperator, SectorSpec, SparseOperator,
};
use crate::scalar::{Real, C};
use crate::statevector::{BipartitionSpec, Statevector};

/// Largest register the dense solver accepts.
pub const MAX_DENSE_QUBITS: usize = 14;

#[derive(Clone, Debug)]
enum Vectors<T: Real> {
    Real(Vec<T>),
    Complex(Vec<C<T>>),
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian operator.
///
/// Eigenvectors are stored in the diagonalized basis: the sector basis when a
/// sector was given, the full computational basis otherwise. Use
/// [`eigenvector`](Self::eigenvector) to obtain a full-register state.
#[derive(Clone, Debug)]
pub struct SpectrumResult<T: Real = f64> {
    num_qubits: usize,
    eigenvalues: Vec<T>,
    vectors: Vectors<T>,
    sector: Option<SectorSpec>,
    basis_map: Vec<usize>,
}

fn check_size(num_qubits: usize) -> Result<()> {
    if num_qubits > MAX_DENSE_QUBITS {
        return Err(Error::DimensionTooLarge {
            dim: 1 << num_qubits,
            limit: 1 << MAX_DENSE_QUBITS,
        });
    }
    Ok(())
}

/// Dense block of `h` on `basis`, column-major, plus the largest |Im| seen.
fn dense_block<T: Real>(h: &SparseOperator<T>, basis: &[usize]) -> (Vec<C<T>>, T) {
    let d = basis.len();
    let mut m = vec![Complex::new(T::zero(), T::zero()); d * d];
    let mut max_imag = T::zero();
    for (i, &b) in basis.iter().enumerate() {
        for (col, v) in h.row(b) {
            if let Ok(j) = basis.binary_search(&col) {
                m[j * d + i] = v;
                max_imag = max_imag.max(v.im.abs());
            }
        }
    }
    (m, max_imag)
}

fn basis_for(num_qubits: usize, sector: Option<&SectorSpec>) -> Result<Vec<usize>> {
    match sector {
        Some(s) => s.basis_states(num_qubits),
        None => Ok((0..1usize << num_qubits).collect()),
    }
}

fn prepare<T: Real>(
    h: &PauliOperator<T>,
    sector: Option<&SectorSpec>,
) -> Result<(Vec<usize>, Vec<C<T>>, bool)> {
    let n = h.num_qubits();
    check_size(n)?;
    let scale = T::one().max(h.coefficient_norm());
    let residual = h.hermiticity_residual();
    if residual > T::lit(1e-9) * scale {
        return Err(Error::NotHermitian(residual.as_f64()));
    }
    let basis = basis_for(n, sector)?;
    let (m, max_imag) = dense_block(&h.to_sparse(), &basis);
    let real = max_imag <= T::lit(T::ZERO_TOL * 100.0) * scale;
    Ok((basis, m, real))
}

/// Full eigensystem of `h`, restricted to `sector` if given.
///
/// Real operators go through the real symmetric solver; anything with
/// imaginary matrix elements falls back to the Hermitian one.
pub fn diagonalize<T: Real>(
    h: &PauliOperator<T>,
    sector: Option<&SectorSpec>,
) -> Result<SpectrumResult<T>> {
    let (basis, m, real) = prepare(h, sector)?;
    let d = basis.len();
    let (eigenvalues, vectors) = if real {
        let (vals, vecs) = T::symmetric_eigen(d, m.into_iter().map(|z| z.re).collect());
        (vals, Vectors::Real(vecs))
    } else {
        let (vals, vecs) = T::hermitian_eigen(d, m);
        (vals, Vectors::Complex(vecs))
    };
    Ok(SpectrumResult {
        num_qubits: h.num_qubits(),
        eigenvalues,
        vectors,
        sector: sector.cloned(),
        basis_map: basis,
    })
}

/// Eigenvalues only, ascending. Several times cheaper than [`diagonalize`].
pub fn eigenvalues<T: Real>(h: &PauliOperator<T>, sector: Option<&SectorSpec>) -> Result<Vec<T>> {
    let (basis, m, real) = prepare(h, sector)?;
    let d = basis.len();
    if real {
        Ok(T::symmetric_eigenvalues(d, m.into_iter().map(|z| z.re).collect()))
    } else {
        Ok(T::hermitian_eigen(d, m).0)
    }
}

impl<T: Real> SpectrumResult<T> {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Dimension of the diagonalized space.
    pub fn dim(&self) -> usize {
        self.basis_map.len()
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn sector(&self) -> Option<&SectorSpec> {
        self.sector.as_ref()
    }

    /// Full-register index of each basis vector of the diagonalized space.
    pub fn basis_map(&self) -> &[usize] {
        &self.basis_map
    }

    pub fn is_real(&self) -> bool {
        matches!(self.vectors, Vectors::Real(_))
    }

    /// Coefficients of eigenvector `j` in the diagonalized basis.
    pub fn coefficients(&self, j: usize) -> Vec<C<T>> {
        let d = self.dim();
        match &self.vectors {
            Vectors::Real(v) => v[j * d..(j + 1) * d]
                .iter()
                .map(|&x| Complex::new(x, T::zero()))
                .collect(),
            Vectors::Complex(v) => v[j * d..(j + 1) * d].to_vec(),
        }
    }

    /// Eigenvector `j` as a full-register state.
    pub fn eigenvector(&self, j: usize) -> Statevector<T> {
        self.expand(&self.coefficients(j))
    }

    /// All eigenvectors as full-register states (memory heavy for big spaces).
    pub fn eigenvectors(&self) -> Vec<Statevector<T>> {
        (0..self.dim()).map(|j| self.eigenvector(j)).collect()
    }

    /// Embeds diagonalized-basis coefficients into the full register.
    pub fn expand(&self, coeffs: &[C<T>]) -> Statevector<T> {
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << self.num_qubits];
        for (&index, &c) in self.basis_map.iter().zip(coeffs) {
            amps[index] = c;
        }
        Statevector::from_amplitudes(amps).expect("power-of-two register")
    }

    /// Restriction of `state` to the diagonalized space and the norm² left out.
    pub fn project(&self, state: &Statevector<T>) -> Result<(Vec<C<T>>, T)> {
        if state.num_qubits() != self.num_qubits {
            return Err(Error::SizeMismatch {
                expected: self.num_qubits,
                found: state.num_qubits(),
            });
        }
        let amps = state.amplitudes();
        let coeffs: Vec<C<T>> = self.basis_map.iter().map(|&i| amps[i]).collect();
        let inside: T = coeffs.iter().map(|c| c.norm_sqr()).sum();
        let leakage = (state.norm_sqr() - inside).max(T::zero());
        Ok((coeffs, leakage))
    }

    /// `<phi_j|psi>` for every eigenvector, from diagonalized-basis coefficients.
    pub fn overlaps_with(&self, coeffs: &[C<T>]) -> Vec<C<T>> {
        let d = self.dim();
        match &self.vectors {
            Vectors::Real(v) => (0..d)
                .map(|j| {
                    let col = &v[j * d..(j + 1) * d];
                    let mut acc = Complex::new(T::zero(), T::zero());
                    for (&a, &c) in col.iter().zip(coeffs) {
                        acc += c * a;
                    }
                    acc
                })
                .collect(),
            Vectors::Complex(v) => (0..d)
                .map(|j| {
                    let col = &v[j * d..(j + 1) * d];
                    let mut acc = Complex::new(T::zero(), T::zero());
                    for (a, &c) in col.iter().zip(coeffs) {
                        acc += a.conj() * c;
                    }
                    acc
                })
                .collect(),
        }
    }

    /// Combination `sum_j w_j |phi_j>` in the diagonalized basis.
    pub fn combine(&self, weights: &[C<T>]) -> Vec<C<T>> {
        let d = self.dim();
        let mut out = vec![Complex::new(T::zero(), T::zero()); d];
        for (j, &w) in weights.iter().enumerate() {
            if w.norm_sqr() == T::zero() {
                continue;
            }
            match &self.vectors {
                Vectors::Real(v) => {
                    for (o, &a) in out.iter_mut().zip(&v[j * d..(j + 1) * d]) {
                        *o += w * a;
                    }
                }
                Vectors::Complex(v) => {
                    for (o, &a) in out.iter_mut().zip(&v[j * d..(j + 1) * d]) {
                        *o += w * a;
                    }
                }
            }
        }
        out
    }

    /// `|<phi_j|probe>|^2` for every eigenvector, and the probe's leakage.
    pub fn fidelities(&self, probe: &Statevector<T>) -> Result<(Vec<T>, T)> {
        let (coeffs, leakage) = self.project(probe)?;
        let f = self.overlaps_with(&coeffs).iter().map(|c| c.norm_sqr()).collect();
        Ok((f, leakage))
    }

    /// Entanglement entropy of every eigenvector across `cut`.
    pub fn entropies(&self, cut: &BipartitionSpec) -> Result<Vec<T>> {
        (0..self.dim())
            .map(|j| self.eigenvector(j).entanglement_entropy(cut))
            .collect()
    }

    /// `<i|H|i>` for every basis vector `i` of the diagonalized space.
    pub fn diagonal_energies(&self) -> Vec<T> {
        let d = self.dim();
        let mut out = vec![T::zero(); d];
        for (j, &e) in self.eigenvalues.iter().enumerate() {
            match &self.vectors {
                Vectors::Real(v) => {
                    for (o, &a) in out.iter_mut().zip(&v[j * d..(j + 1) * d]) {
                        *o += a * a * e;
                    }
                }
                Vectors::Complex(v) => {
                    for (o, a) in out.iter_mut().zip(&v[j * d..(j + 1) * d]) {
                        *o += a.norm_sqr() * e;
                    }
                }
            }
        }
        out
    }

    /// Index of the eigenvalue closest to `energy`.
    pub fn nearest(&self, energy: T) -> usize {
        let mut best = 0;
        for (j, &e) in self.eigenvalues.iter().enumerate() {
            if (e - energy).abs() < (self.eigenvalues[best] - energy).abs() {
                best = j;
            }
        }
        best
    }
}

/// Every sector of the conserved quantity of `model`; together they
/// partition the register.
pub fn all_sectors(model: Model, num_sites: usize) -> Vec<SectorSpec> {
    match model {
        Model::H1 => (0..=num_sites).map(SectorSpec::bosons).collect(),
        Model::H2 => (0..num_sites)
            .map(|k| SectorSpec::domain_walls(k, None))
            .collect(),
    }
}

/// One spectrum per non-empty sector.
pub fn diagonalize_sectors<T: Real>(
    h: &PauliOperator<T>,
    sectors: &[SectorSpec],
) -> Result<Vec<SpectrumResult<T>>> {
    let mut out = Vec::with_capacity(sectors.len());
    for s in sectors {
        match diagonalize(h, Some(s)) {
            Ok(spec) => out.push(spec),
            Err(Error::EmptySector) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// How well a candidate scar state satisfies its defining properties.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ScarCheck<T: Real = f64> {
    /// `<psi|H|psi>`.
    pub energy: T,
    /// Sector eigenvalue closest to `energy`.
    pub ed_energy: T,
    /// Position of `ed_energy` in the ascending sector spectrum.
    pub rank: usize,
    pub dim: usize,
    /// `||(H - ed_energy)|psi>||`.
    pub residual: T,
    /// `<psi|S|psi>` for the sector's conserved quantity.
    pub symmetry: T,
    /// `||(S - q)|psi>||` with `q` the sector's quantum number.
    pub symmetry_residual: T,
    pub entropy: T,
}

fn distance<T: Real>(a: &Statevector<T>, b: &Statevector<T>, scale: T) -> T {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (*x - *y * scale).norm_sqr())
        .sum::<T>()
        .sqrt()
}

/// Checks `state` against the spectrum of `h` restricted to `sector`.
pub fn check_scar<T: Real>(
    h: &PauliOperator<T>,
    state: &Statevector<T>,
    sector: &SectorSpec,
    cut: &BipartitionSpec,
) -> Result<ScarCheck<T>> {
    let n = h.num_qubits();
    let sparse = h.to_sparse();
    let energy = sparse.expectation(state)?;
    let spectrum = eigenvalues(h, Some(sector))?;
    let rank = (0..spectrum.len())
        .min_by(|&a, &b| {
            (spectrum[a] - energy)
                .abs()
                .partial_cmp(&(spectrum[b] - energy).abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .ok_or(Error::EmptySector)?;
    let ed_energy = spectrum[rank];
    let residual = distance(&sparse.apply(state)?, state, ed_energy);
    let s = symmetry_operator::<T>(sector, n)?.to_sparse();
    let q = T::from_usize(sector.quantum_number).expect("count fits");
    Ok(ScarCheck {
        energy,
        ed_energy,
        rank,
        dim: spectrum.len(),
        residual,
        symmetry: s.expectation(state)?,
        symmetry_residual: distance(&s.apply(state)?, state, q),
        entropy: state.entanglement_entropy(cut)?,
    })
}

/// One eigenstate's energy, overlap with a probe, and entanglement entropy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EigenRecord<T: Real = f64> {
    pub index: usize,
    pub energy: T,
    pub fidelity: T,
    pub entropy: T,
}

/// Overlap profile of a probe state across a spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FidelitySpectrum<T: Real = f64> {
    pub records: Vec<EigenRecord<T>>,
    /// Norm² of the probe outside the diagonalized space.
    pub leakage: T,
}

impl<T: Real> FidelitySpectrum<T> {
    /// The `k` records with the largest fidelity, best first.
    pub fn top_k(&self, k: usize) -> Vec<EigenRecord<T>> {
        let mut sorted = self.records.clone();
        sorted.sort_by(|a, b| {
            b.fidelity
                .partial_cmp(&a.fidelity)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.index.cmp(&b.index))
        });
        sorted.truncate(k);
        sorted
    }

    pub fn total_fidelity(&self) -> T {
        self.records.iter().map(|r| r.fidelity).sum()
    }
}

/// Fidelity of `probe` with each eigenstate, alongside energies and entropies.
pub fn fidelity_spectrum<T: Real>(
    probe: &Statevector<T>,
    spec: &SpectrumResult<T>,
    cut: &BipartitionSpec,
) -> Result<FidelitySpectrum<T>> {
    let entropies = spec.entropies(cut)?;
    fidelity_spectrum_with(probe, spec, &entropies)
}

/// As [`fidelity_spectrum`] with entropies computed once in advance.
pub fn fidelity_spectrum_with<T: Real>(
    probe: &Statevector<T>,
    spec: &SpectrumResult<T>,
    entropies: &[T],
) -> Result<FidelitySpectrum<T>> {
    if entropies.len() != spec.dim() {
        return Err(Error::SizeMismatch {
            expected: spec.dim(),
            found: entropies.len(),
        });
    }
    let (fidelities, leakage) = spec.fidelities(probe)?;
    let records = fidelities
        .into_iter()
        .enumerate()
        .map(|(index, fidelity)| EigenRecord {
            index,
            energy: spec.eigenvalues[index],
            fidelity,
            entropy: entropies[index],
        })
        .collect();
    Ok(FidelitySpectrum { records, leakage })
}

/// The boson model with `alpha = 0`, which moves the scar out of the bulk.
pub fn scarless_h1<T: Real>(p: &H1Params) -> Result<(H1Params, PauliOperator<T>)> {
    let params = p.with_alpha(0.0);
    let h = build_h1(&params)?;
    Ok((params, h))
}

/// Eigenstates with anomalously low entanglement in the bulk of the spectrum.
///
/// The bulk is the middle half of the eigenstates by energy rank. A state is
/// flagged when its entropy lies more than three sample standard deviations
/// below the bulk mean.
pub fn detect_scars<T: Real>(energies: &[T], entropies: &[T]) -> Vec<usize> {
    let d = energies.len().min(entropies.len());
    if d < 4 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        energies[a]
            .partial_cmp(&energies[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let bulk = &order[d / 4..d - d / 4];
    let m = T::from_usize(bulk.len()).expect("count fits");
    let mean = bulk.iter().map(|&j| entropies[j]).sum::<T>() / m;
    let var = bulk
        .iter()
        .map(|&j| (entropies[j] - mean).powi(2))
        .sum::<T>()
        / (m - T::one());
    let threshold = mean - T::lit(3.0) * var.sqrt();
    let mut found: Vec<usize> = bulk
        .iter()
        .copied()
        .filter(|&j| entropies[j] < threshold)
        .collect();
    found.sort_unstable();
    found
}

/// CSV with columns `index,energy,entropy` and `fidelity` when given.
pub fn spectrum_csv<T: Real>(energies: &[T], entropies: &[T], fidelities: Option<&[T]>) -> String {
    let mut out = String::from("index,energy,entropy");
    if fidelities.is_some() {
        out.push_str(",fidelity");
    }
    out.push('\n');
    for (j, (e, s)) in energies.iter().zip(entropies).enumerate() {
        let _ = write!(out, "{j},{e},{s}");
        if let Some(f) = fidelities {
            let _ = write!(out, ",{}", f[j]);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{Pauli, PauliString};

    #[test]
    fn two_level_spectrum() {
        let h = PauliOperator::<f64>::single(1, 0, Pauli::X, 2.0);
        let s = diagonalize(&h, None).unwrap();
        assert!((s.eigenvalues()[0] + 2.0).abs() < 1e-12);
        assert!((s.eigenvalues()[1] - 2.0).abs() < 1e-12);
        assert!(s.is_real());
        let v = s.eigenvector(0);
        assert!((v.amplitudes()[0].norm_sqr() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn complex_operators_use_the_hermitian_path() {
        let h = PauliOperator::<f64>::from_terms(
            2,
            vec![
                PauliString::real(1.0, &[(0, Pauli::Y)]),
                PauliString::real(0.3, &[(0, Pauli::Z), (1, Pauli::Z)]),
            ],
        )
        .unwrap();
        let s = diagonalize(&h, None).unwrap();
        assert!(!s.is_real());
        let vals = eigenvalues(&h, None).unwrap();
        for (a, b) in s.eigenvalues().iter().zip(&vals) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_guard() {
        let h = PauliOperator::<f64>::zero(15);
        assert!(matches!(
            diagonalize(&h, None),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn non_hermitian_rejected() {
        let h = PauliOperator::<f64>::from_terms(
            1,
            vec![PauliString::new(Complex::new(0.0, 1.0), &[(0, Pauli::X)])],
        )
        .unwrap();
        assert!(matches!(diagonalize(&h, None), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn top_k_orders_by_fidelity() {
        let fs = FidelitySpectrum {
            records: (0..5)
                .map(|i| EigenRecord {
                    index: i,
                    energy: i as f64,
                    fidelity: [0.1, 0.4, 0.05, 0.3, 0.15][i],
                    entropy: 0.0,
                })
                .collect(),
            leakage: 0.0,
        };
        let top: Vec<usize> = fs.top_k(3).iter().map(|r| r.index).collect();
        assert_eq!(top, vec![1, 3, 4]);
    }

    #[test]
    fn detection_flags_a_single_outlier() {
        let energies: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let mut entropies: Vec<f64> = (0..40).map(|i| 2.0 + 0.01 * ((i * 7) % 5) as f64).collect();
        entropies[20] = 0.5;
        // low-entropy edge states are outside the bulk and ignored
        entropies[0] = 0.1;
        assert_eq!(detect_scars(&energies, &entropies), vec![20]);
    }

    #[test]
    fn csv_layout() {
        let csv = spectrum_csv(&[-1.0, 1.0], &[0.0, 0.5], Some(&[1.0, 0.0]));
        assert_eq!(csv, "index,energy,entropy,fidelity\n0,-1,0,1\n1,1,0.5,0\n");
    }
}
