//! Exact time evolution in the eigenbasis of a diagonalized Hamiltonian.
//!
//! Units: hbar = 1, times in inverse energy units of the Hamiltonian.

use std::fmt::Write as _;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactdiag::SpectrumResult;
use crate::scalar::{Real, C};
use crate::statevector::{inner, BipartitionSpec, Statevector};

/// Leakage out of the diagonalized space above which evolution is refused.
pub const MAX_LEAKAGE: f64 = 1e-6;

/// `points` evenly spaced times on `[0, t_max]`, both ends included.
pub fn time_grid<T: Real>(t_max: f64, points: usize) -> Vec<T> {
    match points {
        0 => Vec::new(),
        1 => vec![T::zero()],
        _ => (0..points)
            .map(|k| T::lit(t_max * k as f64 / (points - 1) as f64))
            .collect(),
    }
}

/// 400 points on `[0, 50]`.
pub fn default_times<T: Real>() -> Vec<T> {
    time_grid(50.0, 400)
}

/// An initial state, the spectra to evolve it with, and the sampling times.
///
/// Usually a single sector spectrum; [`over_sectors`](Self::over_sectors)
/// evolves states spread over several sectors of a conserved quantity.
#[derive(Clone, Debug)]
pub struct EvolutionPlan<'a, T: Real = f64> {
    blocks: Vec<Block<'a, T>>,
    initial: Statevector<T>,
    times: Vec<T>,
    leakage: T,
}

#[derive(Clone, Debug)]
struct Block<'a, T: Real> {
    spectrum: &'a SpectrumResult<T>,
    // <basis_i|psi(0)> restricted to the block
    coeffs: Vec<C<T>>,
    // <phi_j|psi(0)>
    overlaps: Vec<C<T>>,
}

impl<'a, T: Real> EvolutionPlan<'a, T> {
    pub fn new(
        spectrum: &'a SpectrumResult<T>,
        initial: Statevector<T>,
        times: Vec<T>,
    ) -> Result<Self> {
        Self::over_sectors(std::slice::from_ref(spectrum), initial, times)
    }

    /// Evolves with the direct sum of `spectra`, which must live on disjoint
    /// basis states of the same register.
    pub fn over_sectors(
        spectra: &'a [SpectrumResult<T>],
        initial: Statevector<T>,
        times: Vec<T>,
    ) -> Result<Self> {
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidTimes("times must be finite".into()));
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidTimes("times must be ascending".into()));
        }
        let norm = initial.norm_sqr();
        if (norm - T::one()).abs() > T::lit(1e-8) {
            return Err(Error::InvalidTimes(format!(
                "initial state has norm^2 {norm}, expected 1"
            )));
        }
        if spectra.is_empty() {
            return Err(Error::InvalidParams("no spectrum to evolve with".into()));
        }
        let mut blocks = Vec::with_capacity(spectra.len());
        let mut captured = T::zero();
        for spectrum in spectra {
            let (coeffs, _) = spectrum.project(&initial)?;
            captured += coeffs.iter().map(|c| c.norm_sqr()).sum::<T>();
            let overlaps = spectrum.overlaps_with(&coeffs);
            blocks.push(Block {
                spectrum,
                coeffs,
                overlaps,
            });
        }
        let leakage = (T::one() - captured).max(T::zero());
        if leakage > T::lit(MAX_LEAKAGE) {
            return Err(Error::Leakage(leakage.as_f64()));
        }
        Ok(EvolutionPlan {
            blocks,
            initial,
            times,
            leakage,
        })
    }

    pub fn initial(&self) -> &Statevector<T> {
        &self.initial
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    /// Norm² of the initial state outside the diagonalized space (dropped).
    pub fn leakage(&self) -> T {
        self.leakage
    }

    /// `<H>` of the initial state, from its eigenbasis weights.
    pub fn energy(&self) -> T {
        self.blocks.iter().map(|b| weighted_energy(b.spectrum, &b.overlaps)).sum()
    }

    /// `|psi(t)>` in each block's basis.
    fn coefficients_at(&self, t: T) -> Vec<Vec<C<T>>> {
        self.blocks
            .iter()
            .map(|b| {
                let weights: Vec<C<T>> = b
                    .overlaps
                    .iter()
                    .zip(b.spectrum.eigenvalues())
                    .map(|(&c, &e)| c * Complex::from_polar(T::one(), -e * t))
                    .collect();
                b.spectrum.combine(&weights)
            })
            .collect()
    }

    fn assemble(&self, coeffs: &[Vec<C<T>>]) -> Statevector<T> {
        let mut amps = vec![Complex::new(T::zero(), T::zero()); self.initial.dim()];
        for (b, c) in self.blocks.iter().zip(coeffs) {
            for (&i, &a) in b.spectrum.basis_map().iter().zip(c) {
                amps[i] += a;
            }
        }
        Statevector::from_amplitudes(amps).expect("register dimension is a power of two")
    }

    /// `|psi(t)> = sum_j exp(-i E_j t) <phi_j|psi(0)> |phi_j>`.
    pub fn state_at(&self, t: T) -> Statevector<T> {
        self.assemble(&self.coefficients_at(t))
    }
}

fn weighted_energy<T: Real>(spectrum: &SpectrumResult<T>, overlaps: &[C<T>]) -> T {
    overlaps
        .iter()
        .zip(spectrum.eigenvalues())
        .map(|(c, &e)| c.norm_sqr() * e)
        .sum()
}

/// The evolved state at every time of the plan.
pub fn evolve<T: Real>(plan: &EvolutionPlan<'_, T>) -> Vec<Statevector<T>> {
    plan.times.iter().map(|&t| plan.state_at(t)).collect()
}

/// Return fidelity, entanglement entropy and energy at one time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TracePoint<T: Real = f64> {
    pub t: T,
    /// `|<psi(0)|psi(t)>|^2`
    pub fidelity: T,
    pub entropy: T,
    /// `<psi(t)|H|psi(t)>`, recomputed from the evolved state.
    pub energy: T,
}

/// `(t, F(t), S(t), <H>(t))` along the plan's time grid.
pub fn revival_trace<T: Real>(
    plan: &EvolutionPlan<'_, T>,
    cut: &BipartitionSpec,
) -> Result<Vec<TracePoint<T>>> {
    plan.times
        .iter()
        .map(|&t| {
            let coeffs = plan.coefficients_at(t);
            let mut overlap = Complex::new(T::zero(), T::zero());
            let mut energy = T::zero();
            for (b, c) in plan.blocks.iter().zip(&coeffs) {
                overlap += inner(&b.coeffs, c);
                energy += weighted_energy(b.spectrum, &b.spectrum.overlaps_with(c));
            }
            let entropy = plan.assemble(&coeffs).entanglement_entropy(cut)?;
            Ok(TracePoint {
                t,
                fidelity: overlap.norm_sqr(),
                entropy,
                energy,
            })
        })
        .collect()
}

/// Mean fidelity and entropy over points with `t >= t_from`.
pub fn late_time_average<T: Real>(trace: &[TracePoint<T>], t_from: T) -> Option<(T, T)> {
    let late: Vec<&TracePoint<T>> = trace.iter().filter(|p| p.t >= t_from).collect();
    if late.is_empty() {
        return None;
    }
    let m = T::from_usize(late.len()).expect("count fits");
    let f = late.iter().map(|p| p.fidelity).sum::<T>() / m;
    let s = late.iter().map(|p| p.entropy).sum::<T>() / m;
    Some((f, s))
}

/// Trajectory CSV with columns `t,F,S,H`.
pub fn trace_csv<T: Real>(trace: &[TracePoint<T>]) -> String {
    let mut out = String::from("t,F,S,H\n");
    for p in trace {
        let _ = writeln!(out, "{},{},{},{}", p.t, p.fidelity, p.entropy, p.energy);
    }
    out
}

/// Mean and sample standard deviation of the entanglement entropy of
/// Haar-random states supported on the diagonalized space.
///
/// Haar states are drawn as normalized vectors of i.i.d. complex Gaussians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EntropyBand<T: Real = f64> {
    pub mean: T,
    pub std: T,
    pub samples: usize,
}

impl<T: Real> EntropyBand<T> {
    /// Whether `s` lies within `mean +- k std`.
    pub fn contains(&self, s: T, k: T) -> bool {
        (s - self.mean).abs() <= k * self.std
    }
}

pub fn haar_entropy_band<T: Real>(
    spectrum: &SpectrumResult<T>,
    cut: &BipartitionSpec,
    samples: usize,
    seed: u64,
) -> Result<EntropyBand<T>> {
    if samples < 2 {
        return Err(Error::InvalidParams("need at least two Haar samples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(samples);
    for _ in 0..samples {
        let coeffs: Vec<C<T>> = (0..spectrum.dim())
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(T::lit(re), T::lit(im))
            })
            .collect();
        let state = spectrum.expand(&coeffs).normalized();
        values.push(state.entanglement_entropy(cut)?);
    }
    let m = T::from_usize(samples).expect("count fits");
    let mean = values.iter().copied().sum::<T>() / m;
    let var = values.iter().map(|&s| (s - mean).powi(2)).sum::<T>() / (m - T::one());
    Ok(EntropyBand {
        mean,
        std: var.sqrt(),
        samples,
    })
}

/// A computational basis state of the diagonalized space whose diagonal
/// energy `<i|H|i>` lies in `[lo, hi]`, chosen uniformly with `seed`.
pub fn random_fock_state<T: Real>(
    spectrum: &SpectrumResult<T>,
    window: (T, T),
    seed: u64,
) -> Result<Statevector<T>> {
    let candidates: Vec<usize> = spectrum
        .diagonal_energies()
        .into_iter()
        .enumerate()
        .filter(|&(_, e)| e >= window.0 && e <= window.1)
        .map(|(k, _)| k)
        .collect();
    if candidates.is_empty() {
        return Err(Error::InvalidParams(format!(
            "no basis state with diagonal energy in [{}, {}]",
            window.0, window.1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = candidates[rng.random_range(0..candidates.len())];
    Statevector::basis(spectrum.num_qubits(), spectrum.basis_map()[k])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactdiag::diagonalize;
    use crate::operators::{Pauli, PauliOperator};
    use crate::statevector::Gate;

    #[test]
    fn grid_endpoints() {
        let g: Vec<f64> = default_times();
        assert_eq!(g.len(), 400);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[399], 50.0);
    }

    #[test]
    fn two_level_fidelity_is_cos_squared() {
        let h = PauliOperator::<f64>::single(1, 0, Pauli::Z, 1.0);
        let spec = diagonalize(&h, None).unwrap();
        let plus = Statevector::zero(1)
            .apply_gate(&Gate::ry(0, 0), &[std::f64::consts::FRAC_PI_2])
            .unwrap();
        let plan = EvolutionPlan::new(&spec, plus, time_grid(3.0, 31)).unwrap();
        let cut = BipartitionSpec::new(vec![0], 1).unwrap();
        for p in revival_trace(&plan, &cut).unwrap() {
            assert!((p.fidelity - p.t.cos().powi(2)).abs() < 1e-12);
            assert!(p.energy.abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_plans() {
        let h = PauliOperator::<f64>::single(1, 0, Pauli::X, 1.0);
        let spec = diagonalize(&h, None).unwrap();
        let psi = Statevector::zero(1);
        assert!(EvolutionPlan::new(&spec, psi.clone(), vec![1.0, 0.5]).is_err());
        assert!(EvolutionPlan::new(&spec, psi.clone(), vec![f64::NAN]).is_err());
        let doubled = Statevector::from_amplitudes(vec![
            Complex::new(2.0, 0.0),
            Complex::new(0.0, 0.0),
        ])
        .unwrap();
        assert!(EvolutionPlan::new(&spec, doubled, vec![0.0]).is_err());
    }
}
