//! Dense statevector simulation.
//!
//! Qubit `q` is bit `q` of the amplitude index (little-endian), and `|0>` is
//! the `+1` eigenstate of `Z`. Rotations follow `R_P(theta) = exp(-i theta P / 2)`.

use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::PauliOperator;
use crate::scalar::{Real, C};

/// Gate kinds available to circuits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    #[serde(rename = "RX")]
    Rx,
    #[serde(rename = "RY")]
    Ry,
    #[serde(rename = "RZ")]
    Rz,
    #[serde(rename = "CZ")]
    Cz,
    X,
    Z,
}

impl GateKind {
    pub fn is_rotation(self) -> bool {
        matches!(self, GateKind::Rx | GateKind::Ry | GateKind::Rz)
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cz => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::Cz => "CZ",
            GateKind::X => "X",
            GateKind::Z => "Z",
        }
    }

    /// Generator of a rotation gate, as the Pauli letter it exponentiates.
    pub(crate) fn generator(self) -> Option<Pauli1> {
        match self {
            GateKind::Rx => Some(Pauli1::X),
            GateKind::Ry => Some(Pauli1::Y),
            GateKind::Rz => Some(Pauli1::Z),
            _ => None,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Pauli1 {
    X,
    Y,
    Z,
}

/// A single gate: kind, target qubits and (for rotations) the parameter slot
/// holding its angle.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gate {
    kind: GateKind,
    targets: Vec<usize>,
    param_slot: Option<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>, param_slot: Option<usize>) -> Result<Self> {
        if targets.len() != kind.arity() {
            return Err(Error::InvalidGate(format!(
                "{kind} expects {} target(s), got {}",
                kind.arity(),
                targets.len()
            )));
        }
        if kind == GateKind::Cz && targets[0] == targets[1] {
            return Err(Error::InvalidGate("CZ targets must be distinct".into()));
        }
        if kind.is_rotation() != param_slot.is_some() {
            return Err(Error::InvalidGate(format!(
                "{kind} {} a parameter slot",
                if kind.is_rotation() { "requires" } else { "does not take" }
            )));
        }
        Ok(Gate {
            kind,
            targets,
            param_slot,
        })
    }

    pub fn rx(qubit: usize, slot: usize) -> Self {
        Gate::new(GateKind::Rx, vec![qubit], Some(slot)).unwrap()
    }

    pub fn ry(qubit: usize, slot: usize) -> Self {
        Gate::new(GateKind::Ry, vec![qubit], Some(slot)).unwrap()
    }

    pub fn rz(qubit: usize, slot: usize) -> Self {
        Gate::new(GateKind::Rz, vec![qubit], Some(slot)).unwrap()
    }

    pub fn x(qubit: usize) -> Self {
        Gate::new(GateKind::X, vec![qubit], None).unwrap()
    }

    pub fn z(qubit: usize) -> Self {
        Gate::new(GateKind::Z, vec![qubit], None).unwrap()
    }

    /// # Panics
    /// If `a == b`.
    pub fn cz(a: usize, b: usize) -> Self {
        Gate::new(GateKind::Cz, vec![a, b], None).expect("CZ targets must be distinct")
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn param_slot(&self) -> Option<usize> {
        self.param_slot
    }

    /// Same gate with every qubit index moved by `offset`.
    pub fn shifted(&self, offset: usize) -> Gate {
        Gate {
            kind: self.kind,
            targets: self.targets.iter().map(|q| q + offset).collect(),
            param_slot: self.param_slot,
        }
    }

    pub(crate) fn check(&self, num_qubits: usize) -> Result<()> {
        for &q in &self.targets {
            if q >= num_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    num_qubits,
                });
            }
        }
        Ok(())
    }

    pub(crate) fn angle<T: Real>(&self, params: &[T]) -> Result<Option<T>> {
        match self.param_slot {
            None => Ok(None),
            Some(slot) => params
                .get(slot)
                .copied()
                .map(Some)
                .ok_or(Error::UnresolvedParameter {
                    slot,
                    len: params.len(),
                }),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        for q in &self.targets {
            write!(f, " q{q}")?;
        }
        if let Some(slot) = self.param_slot {
            write!(f, " slot{slot}")?;
        }
        Ok(())
    }
}

/// The qubits kept after tracing out the rest of the register.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartitionSpec {
    subsystem_qubits: Vec<usize>,
}

impl BipartitionSpec {
    pub fn new(mut subsystem_qubits: Vec<usize>, num_qubits: usize) -> Result<Self> {
        subsystem_qubits.sort_unstable();
        if subsystem_qubits.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidCut("duplicate qubit in subsystem".into()));
        }
        if let Some(&q) = subsystem_qubits.iter().find(|&&q| q >= num_qubits) {
            return Err(Error::InvalidCut(format!(
                "qubit {q} outside a {num_qubits}-qubit register"
            )));
        }
        Ok(BipartitionSpec { subsystem_qubits })
    }

    /// The left half of the chain, qubits `0..n/2`.
    pub fn half_chain(num_qubits: usize) -> Self {
        BipartitionSpec {
            subsystem_qubits: (0..num_qubits / 2).collect(),
        }
    }

    pub fn subsystem_qubits(&self) -> &[usize] {
        &self.subsystem_qubits
    }
}

/// Pure state of `num_qubits` qubits as `2^num_qubits` complex amplitudes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStatevector<T>", bound = "T: Real")]
pub struct Statevector<T: Real = f64> {
    num_qubits: usize,
    amplitudes: Vec<C<T>>,
}

#[derive(Deserialize)]
#[serde(bound = "T: Real")]
struct RawStatevector<T: Real> {
    num_qubits: usize,
    amplitudes: Vec<C<T>>,
}

impl<T: Real> TryFrom<RawStatevector<T>> for Statevector<T> {
    type Error = Error;

    fn try_from(raw: RawStatevector<T>) -> Result<Self> {
        let expected = 1usize
            .checked_shl(raw.num_qubits as u32)
            .ok_or(Error::DimensionTooLarge {
                dim: usize::MAX,
                limit: 1 << 30,
            })?;
        if raw.amplitudes.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                found: raw.amplitudes.len(),
            });
        }
        Ok(Statevector {
            num_qubits: raw.num_qubits,
            amplitudes: raw.amplitudes,
        })
    }
}

impl<T: Real> Statevector<T> {
    /// `|0...0>`.
    pub fn zero(num_qubits: usize) -> Self {
        Self::basis(num_qubits, 0).expect("index 0 always valid")
    }

    /// Computational basis state `|index>`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::SizeMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut amplitudes = vec![C::<T>::new(T::zero(), T::zero()); dim];
        amplitudes[index] = C::new(T::one(), T::zero());
        Ok(Statevector {
            num_qubits,
            amplitudes,
        })
    }

    /// Wraps an amplitude buffer whose length must be a power of two. No
    /// normalization is applied.
    pub fn from_amplitudes(amplitudes: Vec<C<T>>) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo { len });
        }
        Ok(Statevector {
            num_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C<T>] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C<T>> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Rescales to unit norm. A zero vector is returned unchanged.
    pub fn normalized(mut self) -> Self {
        let n = self.norm_sqr().sqrt();
        if n > T::zero() {
            let inv = T::one() / n;
            for a in &mut self.amplitudes {
                *a *= inv;
            }
        }
        self
    }

    /// Returns the state after `gate`, leaving `self` untouched.
    pub fn apply_gate(&self, gate: &Gate, params: &[T]) -> Result<Self> {
        let mut out = self.clone();
        out.apply_gate_mut(gate, params)?;
        Ok(out)
    }

    pub fn apply_gate_mut(&mut self, gate: &Gate, params: &[T]) -> Result<()> {
        gate.check(self.num_qubits)?;
        let angle = gate.angle(params)?;
        apply_gate_kernel(&mut self.amplitudes, gate, angle.unwrap_or_else(T::zero));
        Ok(())
    }

    /// `<self|other>`, conjugating `self`.
    pub fn inner_product(&self, other: &Self) -> Result<C<T>> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::SizeMismatch {
                expected: self.num_qubits,
                found: other.num_qubits,
            });
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        Ok(self.inner_product(other)?.norm_sqr())
    }

    /// `<psi|O|psi>` for a Hermitian Pauli operator.
    ///
    /// # Panics
    /// In debug builds, if the imaginary residual exceeds `1e-10` relative to
    /// the operator's coefficient norm, which means `obs` was not Hermitian.
    pub fn expectation(&self, obs: &PauliOperator<T>) -> Result<T> {
        let value = obs.expectation_complex(self)?;
        let scale = T::one().max(obs.coefficient_norm());
        debug_assert!(
            value.im.abs() <= T::lit(1e-10) * scale
                || T::ZERO_TOL > 1e-10,
            "expectation of non-Hermitian observable: imaginary part {}",
            value.im
        );
        Ok(value.re)
    }

    /// Von Neumann entropy (natural log) of the reduced state on `cut`.
    pub fn entanglement_entropy(&self, cut: &BipartitionSpec) -> Result<T> {
        let (rows, cols, matrix) = self.reshape_for_cut(cut)?;
        let singular = T::singular_values(rows, cols, matrix);
        Ok(entropy_from_probabilities(
            singular.into_iter().map(|s| s * s),
        ))
    }

    /// Amplitudes arranged as a `2^k x 2^(n-k)` column-major matrix whose
    /// row index enumerates the kept qubits.
    pub(crate) fn reshape_for_cut(
        &self,
        cut: &BipartitionSpec,
    ) -> Result<(usize, usize, Vec<C<T>>)> {
        let kept = cut.subsystem_qubits();
        if let Some(&q) = kept.iter().find(|&&q| q >= self.num_qubits) {
            return Err(Error::InvalidCut(format!(
                "qubit {q} outside a {}-qubit state",
                self.num_qubits
            )));
        }
        let rest: Vec<usize> = (0..self.num_qubits)
            .filter(|q| kept.binary_search(q).is_err())
            .collect();
        let rows = 1usize << kept.len();
        let cols = 1usize << rest.len();
        let mut matrix = vec![C::new(T::zero(), T::zero()); rows * cols];
        for (index, amp) in self.amplitudes.iter().enumerate() {
            let r = gather_bits(index, kept);
            let c = gather_bits(index, &rest);
            matrix[c * rows + r] = *amp;
        }
        Ok((rows, cols, matrix))
    }

    /// JSON form: `{"num_qubits": n, "amplitudes": [[re, im], ...]}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("statevector serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Flat little-endian binary: `u32` qubit count, then `(re, im)` as `f64`
    /// pairs in index order.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + 16 * self.dim());
        out.extend_from_slice(&(self.num_qubits as u32).to_le_bytes());
        for a in &self.amplitudes {
            out.extend_from_slice(&a.re.as_f64().to_le_bytes());
            out.extend_from_slice(&a.im.as_f64().to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 {
            return Err(Error::Parse("truncated header".into()));
        }
        let num_qubits = u32::from_le_bytes(bytes[..4].try_into().unwrap()) as usize;
        if num_qubits > 30 {
            return Err(Error::Parse(format!("implausible qubit count {num_qubits}")));
        }
        let dim = 1usize << num_qubits;
        let body = &bytes[4..];
        if body.len() != 16 * dim {
            return Err(Error::SizeMismatch {
                expected: 16 * dim,
                found: body.len(),
            });
        }
        let amplitudes = body
            .chunks_exact(16)
            .map(|chunk| {
                let re = f64::from_le_bytes(chunk[..8].try_into().unwrap());
                let im = f64::from_le_bytes(chunk[8..].try_into().unwrap());
                C::new(T::lit(re), T::lit(im))
            })
            .collect();
        Ok(Statevector {
            num_qubits,
            amplitudes,
        })
    }
}

pub(crate) fn entropy_from_probabilities<T: Real>(probs: impl Iterator<Item = T>) -> T {
    let floor = T::lit(1e-14);
    probs
        .filter(|&p| p > floor)
        .map(|p| -p * p.ln())
        .sum()
}

#[inline]
fn gather_bits(index: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .enumerate()
        .fold(0, |acc, (k, &q)| acc | (((index >> q) & 1) << k))
}

#[inline]
pub(crate) fn inner<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    let mut re = T::zero();
    let mut im = T::zero();
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re + x.im * y.im;
        im += x.re * y.im - x.im * y.re;
    }
    Complex::new(re, im)
}

/// Applies `gate` with the resolved `angle` (ignored for fixed gates).
pub(crate) fn apply_gate_kernel<T: Real>(amps: &mut [C<T>], gate: &Gate, angle: T) {
    let q = gate.targets[0];
    match gate.kind {
        GateKind::Rx => rx(amps, q, angle),
        GateKind::Ry => ry(amps, q, angle),
        GateKind::Rz => rz(amps, q, angle),
        GateKind::X => pauli_x(amps, q),
        GateKind::Z => pauli_z(amps, q),
        GateKind::Cz => cz(amps, q, gate.targets[1]),
    }
}

/// Calls `f(i0, i1)` for every index pair differing only in bit `q`, with
/// bit `q` clear in `i0`.
#[inline(always)]
fn for_pairs(dim: usize, q: usize, mut f: impl FnMut(usize, usize)) {
    let stride = 1usize << q;
    let mut base = 0;
    while base < dim {
        for i0 in base..base + stride {
            f(i0, i0 + stride);
        }
        base += stride << 1;
    }
}

pub(crate) fn rx<T: Real>(amps: &mut [C<T>], q: usize, theta: T) {
    let half = theta * T::lit(0.5);
    let (s, c) = half.sin_cos();
    for_pairs(amps.len(), q, |i0, i1| {
        let a = amps[i0];
        let b = amps[i1];
        // [[c, -is], [-is, c]]
        amps[i0] = C::new(c * a.re + s * b.im, c * a.im - s * b.re);
        amps[i1] = C::new(c * b.re + s * a.im, c * b.im - s * a.re);
    });
}

pub(crate) fn ry<T: Real>(amps: &mut [C<T>], q: usize, theta: T) {
    let half = theta * T::lit(0.5);
    let (s, c) = half.sin_cos();
    for_pairs(amps.len(), q, |i0, i1| {
        let a = amps[i0];
        let b = amps[i1];
        amps[i0] = C::new(c * a.re - s * b.re, c * a.im - s * b.im);
        amps[i1] = C::new(s * a.re + c * b.re, s * a.im + c * b.im);
    });
}

pub(crate) fn rz<T: Real>(amps: &mut [C<T>], q: usize, theta: T) {
    let half = theta * T::lit(0.5);
    let (s, c) = half.sin_cos();
    // e^{-i theta/2} on |0>, e^{+i theta/2} on |1>
    for_pairs(amps.len(), q, |i0, i1| {
        let a = amps[i0];
        let b = amps[i1];
        amps[i0] = C::new(c * a.re + s * a.im, c * a.im - s * a.re);
        amps[i1] = C::new(c * b.re - s * b.im, c * b.im + s * b.re);
    });
}

pub(crate) fn pauli_x<T: Real>(amps: &mut [C<T>], q: usize) {
    for_pairs(amps.len(), q, |i0, i1| amps.swap(i0, i1));
}

pub(crate) fn pauli_z<T: Real>(amps: &mut [C<T>], q: usize) {
    for_pairs(amps.len(), q, |_, i1| amps[i1] = -amps[i1]);
}

pub(crate) fn cz<T: Real>(amps: &mut [C<T>], a: usize, b: usize) {
    let mask = (1usize << a) | (1usize << b);
    for (i, amp) in amps.iter_mut().enumerate() {
        if i & mask == mask {
            *amp = -*amp;
        }
    }
}

/// `<bra| P_q |ket>` for a single-qubit Pauli on qubit `q`.
pub(crate) fn pauli_matrix_element<T: Real>(
    bra: &[C<T>],
    ket: &[C<T>],
    q: usize,
    pauli: Pauli1,
) -> C<T> {
    let mut acc = C::new(T::zero(), T::zero());
    match pauli {
        Pauli1::X => for_pairs(ket.len(), q, |i0, i1| {
            acc += bra[i0].conj() * ket[i1] + bra[i1].conj() * ket[i0];
        }),
        Pauli1::Y => for_pairs(ket.len(), q, |i0, i1| {
            // Y|0> = i|1>, Y|1> = -i|0>
            let t = bra[i1].conj() * ket[i0] - bra[i0].conj() * ket[i1];
            acc += C::new(-t.im, t.re);
        }),
        Pauli1::Z => for_pairs(ket.len(), q, |i0, i1| {
            acc += bra[i0].conj() * ket[i0] - bra[i1].conj() * ket[i1];
        }),
    }
    acc
}
