//! Benchmark Hamiltonians, their symmetry operators and closed-form scar states.
//!
//! Site `j` (1-based in the formulas) lives on qubit `j - 1`. For the
//! hard-core boson model an occupied site is `|1>`, so `n_j = (1 - Z_j)/2`,
//! `d_j = (X_j + iY_j)/2` and no Jordan-Wigner string is attached.

use std::f64::consts::PI;

use num_complex::{Complex, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::pauli::{Pauli, PauliOperator, PauliString};
use crate::scalar::{Real, C};
use crate::statevector::Statevector;

/// Parameters of the disordered hard-core boson ring with a single scar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct H1Params {
    pub num_sites: usize,
    pub alpha: f64,
    pub disorder_strength: f64,
    /// `gamma_j` for `j = 1..=N`, each in `[-delta/2, delta/2]`.
    pub site_offsets: Vec<f64>,
    pub rng_seed: u64,
}

impl H1Params {
    /// Draws the site offsets uniformly from `[-delta/2, delta/2]` with a
    /// ChaCha8 stream seeded by `rng_seed`.
    pub fn new(num_sites: usize, alpha: f64, disorder_strength: f64, rng_seed: u64) -> Result<Self> {
        if !(disorder_strength >= 0.0) || !disorder_strength.is_finite() {
            return Err(Error::InvalidParams(format!(
                "disorder strength must be finite and non-negative, got {disorder_strength}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let half = disorder_strength / 2.0;
        let site_offsets = (0..num_sites)
            .map(|_| {
                if half > 0.0 {
                    rng.random_range(-half..=half)
                } else {
                    0.0
                }
            })
            .collect();
        let p = H1Params {
            num_sites,
            alpha,
            disorder_strength,
            site_offsets,
            rng_seed,
        };
        p.validate()?;
        Ok(p)
    }

    /// Clean ring (no disorder).
    pub fn clean(num_sites: usize, alpha: f64) -> Result<Self> {
        Self::new(num_sites, alpha, 0.0, 0)
    }

    /// Same disorder realization with a different `alpha`.
    pub fn with_alpha(&self, alpha: f64) -> Self {
        H1Params {
            alpha,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_sites;
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!(
                "H1 needs an even number of sites >= 2, got {n}"
            )));
        }
        if n > 30 {
            return Err(Error::InvalidParams(format!("{n} sites exceeds simulation limit")));
        }
        if !(self.disorder_strength >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "disorder strength must be non-negative, got {}",
                self.disorder_strength
            )));
        }
        if self.site_offsets.len() != n {
            return Err(Error::InvalidParams(format!(
                "expected {n} site offsets, got {}",
                self.site_offsets.len()
            )));
        }
        let half = self.disorder_strength / 2.0;
        if let Some(g) = self.site_offsets.iter().find(|g| g.abs() > half + 1e-15) {
            return Err(Error::InvalidParams(format!(
                "site offset {g} outside [-{half}, {half}]"
            )));
        }
        if !self.alpha.is_finite() {
            return Err(Error::InvalidParams("alpha must be finite".into()));
        }
        Ok(())
    }

    /// `z_j = exp(2 pi i (j + gamma_j) / N)` for `j = 1..=N`.
    pub fn site_positions(&self) -> Vec<Complex64> {
        let n = self.num_sites as f64;
        self.site_offsets
            .iter()
            .enumerate()
            .map(|(q, g)| Complex64::from_polar(1.0, 2.0 * PI * ((q + 1) as f64 + g) / n))
            .collect()
    }

    /// `w_ij = (z_i + z_j) / (z_i - z_j)`; the diagonal is left at zero.
    pub fn couplings(&self) -> Result<Vec<Vec<Complex64>>> {
        let z = self.site_positions();
        let n = z.len();
        let mut w = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let d = z[i] - z[j];
                if d.norm() < 1e-12 {
                    return Err(Error::CoincidentSites(i.min(j), i.max(j)));
                }
                w[i][j] = (z[i] + z[j]) / d;
            }
        }
        Ok(w)
    }
}

/// Real coefficients `G^A .. G^E` of the boson Hamiltonian, indexed by qubit.
#[derive(Clone, Debug, PartialEq)]
pub struct H1Coefficients {
    pub hopping: Vec<Vec<f64>>,
    pub density_density: Vec<Vec<f64>>,
    /// `correlated_hopping[i][j][l]` multiplies `d_i^dag d_l n_j`.
    pub correlated_hopping: Vec<Vec<Vec<f64>>>,
    pub onsite: Vec<f64>,
    pub constant: f64,
}

impl H1Coefficients {
    pub fn compute(p: &H1Params) -> Result<Self> {
        p.validate()?;
        let w = p.couplings()?;
        let n = p.num_sites;
        let alpha = p.alpha;
        let real = |c: Complex64| -> f64 {
            debug_assert!(c.im.abs() <= 1e-9 * c.norm().max(1.0), "coefficient not real: {c}");
            c.re
        };

        let mut hopping = vec![vec![0.0; n]; n];
        let mut density_density = vec![vec![0.0; n]; n];
        let mut correlated_hopping = vec![vec![vec![0.0; n]; n]; n];
        let mut onsite = vec![0.0; n];

        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let wij2 = w[i][j] * w[i][j];
                hopping[i][j] = real(-2.0 * wij2);
                let mut b = (2.0 - alpha) * wij2;
                for l in 0..n {
                    if l != i && l != j {
                        b += 4.0 * w[i][j] * w[i][l];
                        correlated_hopping[i][j][l] = real(-alpha * w[j][i] * w[j][l]);
                    }
                }
                density_density[i][j] = real(b);
            }
        }
        for i in 0..n {
            let mut d = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j == i {
                    continue;
                }
                d -= 2.0 * w[i][j] * w[i][j];
                for l in 0..n {
                    if l != i && l != j {
                        d -= w[i][j] * w[i][l];
                    }
                }
            }
            onsite[i] = real(d);
        }
        let nf = n as f64;
        Ok(H1Coefficients {
            hopping,
            density_density,
            correlated_hopping,
            onsite,
            constant: -nf * (nf - 2.0) * (nf - 4.0) / 6.0,
        })
    }
}

fn real_c<T: Real>(x: f64) -> C<T> {
    Complex::new(T::lit(x), T::zero())
}

/// `d_q^dagger = (X - iY)/2`, i.e. `|1><0|`.
pub fn creation<T: Real>(n: usize, q: usize) -> PauliOperator<T> {
    PauliOperator::from_terms(
        n,
        vec![
            PauliString::real(0.5, &[(q, Pauli::X)]),
            PauliString::new(Complex::new(T::zero(), T::lit(-0.5)), &[(q, Pauli::Y)]),
        ],
    )
    .expect("qubit within register")
}

/// `d_q = (X + iY)/2`, i.e. `|0><1|`.
pub fn annihilation<T: Real>(n: usize, q: usize) -> PauliOperator<T> {
    creation::<T>(n, q).adjoint()
}

/// `n_q = (1 - Z)/2`.
pub fn number<T: Real>(n: usize, q: usize) -> PauliOperator<T> {
    PauliOperator::from_terms(
        n,
        vec![
            PauliString::real(0.5, &[]),
            PauliString::real(-0.5, &[(q, Pauli::Z)]),
        ],
    )
    .expect("qubit within register")
}

/// `P_q = (1 + Z)/2`, the projector on `|0>`.
pub fn projector_zero<T: Real>(n: usize, q: usize) -> PauliOperator<T> {
    PauliOperator::from_terms(
        n,
        vec![
            PauliString::real(0.5, &[]),
            PauliString::real(0.5, &[(q, Pauli::Z)]),
        ],
    )
    .expect("qubit within register")
}

/// Pauli form of the disordered hard-core boson Hamiltonian.
pub fn build_h1<T: Real>(p: &H1Params) -> Result<PauliOperator<T>> {
    let g = H1Coefficients::compute(p)?;
    let n = p.num_sites;
    let create: Vec<PauliOperator<T>> = (0..n).map(|q| creation(n, q)).collect();
    let annihilate: Vec<PauliOperator<T>> = (0..n).map(|q| annihilation(n, q)).collect();
    let occupation: Vec<PauliOperator<T>> = (0..n).map(|q| number(n, q)).collect();

    let mut h = PauliOperator::scaled_identity(n, T::lit(g.constant));
    for i in 0..n {
        h = h + occupation[i].scale(real_c(g.onsite[i]));
        for j in 0..n {
            if i == j {
                continue;
            }
            let hop = &create[i] * &annihilate[j];
            h = h + hop.scale(real_c(g.hopping[i][j]));
            h = h + (&occupation[i] * &occupation[j]).scale(real_c(g.density_density[i][j]));
            for l in 0..n {
                if l == i || l == j {
                    continue;
                }
                let term = &(&create[i] * &annihilate[l]) * &occupation[j];
                h = h + term.scale(real_c(g.correlated_hopping[i][j][l]));
            }
        }
        h = h.simplify();
    }
    Ok(h.simplify())
}

/// Parameters of the domain-wall conserving spin chain with scar towers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct H2Params {
    pub num_sites: usize,
    pub lambda: f64,
    pub delta: f64,
    pub coupling: f64,
}

impl H2Params {
    pub fn new(num_sites: usize, lambda: f64, delta: f64, coupling: f64) -> Result<Self> {
        let p = H2Params {
            num_sites,
            lambda,
            delta,
            coupling,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_sites < 4 {
            return Err(Error::InvalidParams(format!(
                "H2 needs at least 4 sites, got {}",
                self.num_sites
            )));
        }
        if self.num_sites > 30 {
            return Err(Error::InvalidParams(format!(
                "{} sites exceeds simulation limit",
                self.num_sites
            )));
        }
        if ![self.lambda, self.delta, self.coupling].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParams("H2 parameters must be finite".into()));
        }
        Ok(())
    }

    /// Highest tower index, `N/2 - 1`.
    pub fn max_tower_index(&self) -> usize {
        self.num_sites / 2 - 1
    }
}

/// `lambda sum (X_i - Z_{i-1} X_i Z_{i+1}) + Delta sum Z_i + J sum Z_i Z_{i+1}`
/// on an open chain.
pub fn build_h2<T: Real>(p: &H2Params) -> Result<PauliOperator<T>> {
    p.validate()?;
    let n = p.num_sites;
    let mut terms = Vec::with_capacity(4 * n);
    for q in 1..n - 1 {
        terms.push(PauliString::real(p.lambda, &[(q, Pauli::X)]));
        terms.push(PauliString::real(
            -p.lambda,
            &[(q - 1, Pauli::Z), (q, Pauli::X), (q + 1, Pauli::Z)],
        ));
    }
    for q in 0..n {
        terms.push(PauliString::real(p.delta, &[(q, Pauli::Z)]));
    }
    for q in 0..n - 1 {
        terms.push(PauliString::real(p.coupling, &[(q, Pauli::Z), (q + 1, Pauli::Z)]));
    }
    Ok(PauliOperator::from_terms(n, terms)?.simplify())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    H1,
    H2,
}

/// Fixed value of the two edge spins of the open chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeConfig {
    AllZero,
    AllOne,
}

impl EdgeConfig {
    pub fn bit(self) -> usize {
        match self {
            EdgeConfig::AllZero => 0,
            EdgeConfig::AllOne => 1,
        }
    }
}

/// Symmetry sector: boson number for H1, domain-wall number (optionally with
/// fixed edges) for H2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SectorSpec {
    pub model: Model,
    pub quantum_number: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_config: Option<EdgeConfig>,
}

impl SectorSpec {
    pub fn bosons(n_b: usize) -> Self {
        SectorSpec {
            model: Model::H1,
            quantum_number: n_b,
            edge_config: None,
        }
    }

    pub fn domain_walls(n_dw: usize, edge_config: Option<EdgeConfig>) -> Self {
        SectorSpec {
            model: Model::H2,
            quantum_number: n_dw,
            edge_config,
        }
    }

    pub fn validate(&self, num_sites: usize) -> Result<()> {
        match self.model {
            Model::H1 => {
                if self.quantum_number > num_sites {
                    return Err(Error::InvalidSector(format!(
                        "n_b = {} exceeds {num_sites} sites",
                        self.quantum_number
                    )));
                }
                if self.edge_config.is_some() {
                    return Err(Error::InvalidSector("edge configuration only applies to H2".into()));
                }
            }
            Model::H2 => {
                if num_sites == 0 || self.quantum_number > num_sites - 1 {
                    return Err(Error::InvalidSector(format!(
                        "n_dw = {} exceeds {} bonds",
                        self.quantum_number,
                        num_sites.saturating_sub(1)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Whether basis state `index` of an `num_sites` register lies in the sector.
    pub fn contains(&self, index: usize, num_sites: usize) -> bool {
        match self.model {
            Model::H1 => index.count_ones() as usize == self.quantum_number,
            Model::H2 => {
                let walls = ((index ^ (index >> 1)) & ((1usize << (num_sites - 1)) - 1)).count_ones();
                let edges_ok = match self.edge_config {
                    None => true,
                    Some(e) => {
                        index & 1 == e.bit() && (index >> (num_sites - 1)) & 1 == e.bit()
                    }
                };
                walls as usize == self.quantum_number && edges_ok
            }
        }
    }

    /// Sector basis in ascending index order.
    ///
    /// Fixed boson number is enumerated with Gosper's next-combination step;
    /// fixed domain-wall number by placing walls on the `N - 1` bonds and
    /// integrating the spin pattern from the left edge.
    pub fn basis_states(&self, num_sites: usize) -> Result<Vec<usize>> {
        self.validate(num_sites)?;
        let mut states = match self.model {
            Model::H1 => combinations(num_sites, self.quantum_number),
            Model::H2 => {
                let bonds = num_sites - 1;
                let first_spins: &[usize] = match self.edge_config {
                    Some(e) => &[e.bit()][..],
                    None => &[0, 1][..],
                };
                let mut out = Vec::new();
                for walls in combinations(bonds, self.quantum_number) {
                    for &s0 in first_spins {
                        let mut index = s0;
                        let mut spin = s0;
                        for b in 0..bonds {
                            spin ^= (walls >> b) & 1;
                            index |= spin << (b + 1);
                        }
                        if self.contains(index, num_sites) {
                            out.push(index);
                        }
                    }
                }
                out
            }
        };
        states.sort_unstable();
        if states.is_empty() {
            return Err(Error::EmptySector);
        }
        Ok(states)
    }
}

/// All `bits`-bit integers with exactly `ones` bits set, ascending.
fn combinations(bits: usize, ones: usize) -> Vec<usize> {
    if ones > bits {
        return Vec::new();
    }
    if ones == 0 {
        return vec![0];
    }
    let limit = 1usize << bits;
    let mut v = (1usize << ones) - 1;
    let mut out = Vec::new();
    while v < limit {
        out.push(v);
        let t = v | (v - 1);
        v = (t + 1) | (((!t & (t + 1)) - 1) >> (v.trailing_zeros() + 1));
    }
    out
}

/// `N_b = sum_i n_i` or `N_dw = sum_{i<N} (1 - Z_i Z_{i+1})/2`.
pub fn symmetry_operator<T: Real>(s: &SectorSpec, num_sites: usize) -> Result<PauliOperator<T>> {
    s.validate(num_sites)?;
    let n = num_sites;
    let op = match s.model {
        Model::H1 => (0..n).fold(PauliOperator::zero(n), |acc, q| acc + number(n, q)),
        Model::H2 => {
            let mut terms = vec![PauliString::real(0.5 * (n - 1) as f64, &[])];
            for q in 0..n - 1 {
                terms.push(PauliString::real(-0.5, &[(q, Pauli::Z), (q + 1, Pauli::Z)]));
            }
            PauliOperator::from_terms(n, terms)?
        }
    };
    Ok(op.simplify())
}

/// Global spin flip `prod_i X_i`.
pub fn inversion_operator<T: Real>(num_sites: usize) -> PauliOperator<T> {
    let factors: Vec<_> = (0..num_sites).map(|q| (q, Pauli::X)).collect();
    PauliOperator::from_terms(num_sites, vec![PauliString::real(1.0, &factors)])
        .expect("qubits within register")
}

/// Closed-form scar of the boson model, normalized numerically.
///
/// Amplitudes carry `(-1)^{sum_j (j-1) n_j}` and `prod_{i<j} (z_i - z_j)^{2 n_i n_j - n_i - n_j}`
/// restricted to half filling. Products are accumulated in log space.
pub fn scar_state_h1<T: Real>(p: &H1Params) -> Result<Statevector<T>> {
    p.validate()?;
    let n = p.num_sites;
    let z = p.site_positions();
    // ln|z_i - z_j| and arg(z_i - z_j) for i < j
    let mut log_mag = vec![vec![0.0; n]; n];
    let mut arg = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = z[i] - z[j];
            if d.norm() < 1e-12 {
                return Err(Error::CoincidentSites(i, j));
            }
            log_mag[i][j] = d.norm().ln();
            arg[i][j] = d.arg();
        }
    }
    let basis = SectorSpec::bosons(n / 2).basis_states(n)?;
    let mut weights = Vec::with_capacity(basis.len());
    for &index in &basis {
        let occ = |q: usize| (index >> q) & 1;
        let mut lm = 0.0;
        let mut phase = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                // exponent is -1 when exactly one of the pair is occupied, else 0
                if occ(i) != occ(j) {
                    lm -= log_mag[i][j];
                    phase -= arg[i][j];
                }
            }
        }
        let parity: usize = (0..n).map(|q| q * occ(q)).sum();
        if parity % 2 == 1 {
            phase += PI;
        }
        weights.push((lm, phase));
    }
    let max_log = weights
        .iter()
        .map(|w| w.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << n];
    let mut norm2 = 0.0;
    let values: Vec<Complex64> = weights
        .iter()
        .map(|&(lm, ph)| Complex64::from_polar((lm - max_log).exp(), ph))
        .collect();
    for v in &values {
        norm2 += v.norm_sqr();
    }
    let inv = 1.0 / norm2.sqrt();
    for (&index, v) in basis.iter().zip(&values) {
        amps[index] = Complex::new(T::lit(v.re * inv), T::lit(v.im * inv));
    }
    Statevector::from_amplitudes(amps)
}

/// Which tower of the spin chain: rooted at `|0...0>` or at its spin flip.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tower {
    Zero,
    One,
}

impl Tower {
    pub fn edge_config(self) -> EdgeConfig {
        match self {
            Tower::Zero => EdgeConfig::AllZero,
            Tower::One => EdgeConfig::AllOne,
        }
    }
}

/// `sum_{i=2}^{N-1} (-1)^i P_{i-1} F_i P_{i+1}` with `F = |1><0|` flipping a
/// spin out of the `|0>` background.
pub fn magnon_raising_operator<T: Real>(num_sites: usize) -> PauliOperator<T> {
    let n = num_sites;
    let mut op = PauliOperator::zero(n);
    for q in 1..n - 1 {
        let sign = if (q + 1) % 2 == 0 { 1.0 } else { -1.0 };
        let term = &(&projector_zero(n, q - 1) * &creation(n, q)) * &projector_zero(n, q + 1);
        op = op + term.scale_real(T::lit(sign));
    }
    op.simplify()
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// k-magnon member of the requested scar tower, with the closed-form
/// normalization `1/k! * C(N-k-1, k)^{-1/2}`.
pub fn scar_tower_h2<T: Real>(p: &H2Params, k: usize, tower: Tower) -> Result<Statevector<T>> {
    p.validate()?;
    let n = p.num_sites;
    if k > p.max_tower_index() {
        return Err(Error::InvalidParams(format!(
            "tower index {k} outside 0..={}",
            p.max_tower_index()
        )));
    }
    let raise = magnon_raising_operator::<T>(n).to_sparse();
    let mut amps = Statevector::<T>::zero(n).into_amplitudes();
    for _ in 0..k {
        amps = raise.apply_vec(&amps);
    }
    let factorial: f64 = (1..=k).map(|i| i as f64).product();
    let norm = 1.0 / (factorial * binomial(n - k - 1, k).sqrt());
    let scale = T::lit(norm);
    for a in &mut amps {
        *a *= scale;
    }
    let state = Statevector::from_amplitudes(amps)?;
    match tower {
        Tower::Zero => Ok(state),
        Tower::One => inversion_operator::<T>(n).apply(&state),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_term_for_twelve_sites() {
        let p = H1Params::new(12, -2.5, 0.5, 3).unwrap();
        let g = H1Coefficients::compute(&p).unwrap();
        // -N(N-2)(N-4)/6 = -12*10*8/6
        assert_eq!(g.constant, -160.0);
    }

    #[test]
    fn couplings_are_antisymmetric_and_imaginary() {
        for seed in 0..5 {
            let p = H1Params::new(8, -2.5, 0.5, seed).unwrap();
            let w = p.couplings().unwrap();
            for i in 0..8 {
                for j in 0..8 {
                    if i != j {
                        assert!((w[i][j] + w[j][i]).norm() < 1e-12);
                        assert!(w[i][j].re.abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn h1_param_errors() {
        assert!(H1Params::new(7, -2.5, 0.5, 0).is_err());
        assert!(H1Params::new(8, -2.5, -0.1, 0).is_err());
        let mut p = H1Params::clean(4, 0.0).unwrap();
        // gamma_1 = 1 moves site 1 onto site 2
        p.disorder_strength = 2.0;
        p.site_offsets = vec![1.0, 0.0, 0.0, 0.0];
        assert_eq!(build_h1::<f64>(&p).unwrap_err(), Error::CoincidentSites(0, 1));
    }

    #[test]
    fn offsets_respect_disorder_window() {
        let p = H1Params::new(12, -2.5, 0.5, 11).unwrap();
        assert!(p.site_offsets.iter().all(|g| g.abs() <= 0.25));
        assert_eq!(p, H1Params::new(12, -2.5, 0.5, 11).unwrap());
        assert_ne!(p.site_offsets, H1Params::new(12, -2.5, 0.5, 12).unwrap().site_offsets);
    }

    #[test]
    fn h2_all_zero_energy() {
        let p = H2Params::new(14, 1.0, 0.1, 1.0).unwrap();
        let h = build_h2::<f64>(&p).unwrap();
        let e = Statevector::zero(14).expectation(&h).unwrap();
        assert!((e - 14.4).abs() < 1e-12, "{e}");
        assert!(H2Params::new(3, 1.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn h2_zero_parameters_give_zero_operator() {
        let p = H2Params::new(6, 0.0, 0.0, 0.0).unwrap();
        assert!(build_h2::<f64>(&p).unwrap().is_empty());
    }

    #[test]
    fn symmetry_eigenvalues_on_basis_states() {
        let ndw = symmetry_operator::<f64>(&SectorSpec::domain_walls(1, None), 6).unwrap();
        // |000111> read left to right is sites 1..6, i.e. qubits 3,4,5 set
        let psi = Statevector::basis(6, 0b111000).unwrap();
        assert!((psi.expectation(&ndw).unwrap() - 1.0).abs() < 1e-14);

        let nb = symmetry_operator::<f64>(&SectorSpec::bosons(4), 8).unwrap();
        let neel = Statevector::basis(8, 0b0101_0101).unwrap();
        assert!((neel.expectation(&nb).unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn sector_bases() {
        assert_eq!(SectorSpec::bosons(4).basis_states(8).unwrap().len(), 70);
        let walls = SectorSpec::domain_walls(4, Some(EdgeConfig::AllZero))
            .basis_states(10)
            .unwrap();
        // C(9, 4) wall placements
        assert_eq!(walls.len(), 126);
        assert!(walls.iter().all(|&i| i & 1 == 0 && i >> 9 == 0));
        assert_eq!(
            SectorSpec::domain_walls(3, Some(EdgeConfig::AllOne)).basis_states(10),
            Err(Error::EmptySector)
        );
        assert_eq!(SectorSpec::domain_walls(3, None).basis_states(10).unwrap().len(), 168);
        assert!(SectorSpec::domain_walls(10, None).validate(10).is_err());
        assert!(SectorSpec::bosons(9).validate(8).is_err());
    }

    #[test]
    fn tower_root_and_range() {
        let p = H2Params::new(10, 1.0, 0.1, 1.0).unwrap();
        let root = scar_tower_h2::<f64>(&p, 0, Tower::Zero).unwrap();
        assert_eq!(root, Statevector::zero(10));
        let flipped = scar_tower_h2::<f64>(&p, 0, Tower::One).unwrap();
        assert_eq!(flipped, Statevector::basis(10, 1023).unwrap());
        assert!(scar_tower_h2::<f64>(&p, 5, Tower::Zero).is_err());
    }

    #[test]
    fn combination_enumeration() {
        assert_eq!(combinations(4, 2), vec![0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100]);
        assert_eq!(combinations(3, 0), vec![0]);
        assert_eq!(combinations(3, 3), vec![0b111]);
    }
}
