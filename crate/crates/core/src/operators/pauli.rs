use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::operators::sparse::SparseOperator;
use crate::scalar::{Real, C};
use crate::statevector::Statevector;

/// Single-qubit Pauli factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    fn letter(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Coefficient times a tensor product of Pauli factors (identity elsewhere).
///
/// Factors are stored as bit masks: bit `q` of `x` marks an X or Y on qubit
/// `q`, bit `q` of `z` a Z or Y.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliString<T: Real = f64> {
    coefficient: C<T>,
    x: u64,
    z: u64,
}

impl<T: Real> PauliString<T> {
    pub fn identity(coefficient: C<T>) -> Self {
        PauliString {
            coefficient,
            x: 0,
            z: 0,
        }
    }

    pub fn new(coefficient: C<T>, factors: &[(usize, Pauli)]) -> Self {
        let mut s = Self::identity(coefficient);
        for &(q, p) in factors {
            assert!(q < 64, "qubit index {q} exceeds 64-qubit string width");
            let bit = 1u64 << q;
            assert!(s.x & bit == 0 && s.z & bit == 0, "qubit {q} repeated");
            match p {
                Pauli::X => s.x |= bit,
                Pauli::Z => s.z |= bit,
                Pauli::Y => {
                    s.x |= bit;
                    s.z |= bit;
                }
            }
        }
        s
    }

    pub fn real(coefficient: f64, factors: &[(usize, Pauli)]) -> Self {
        Self::new(Complex::new(T::lit(coefficient), T::zero()), factors)
    }

    pub fn coefficient(&self) -> C<T> {
        self.coefficient
    }

    pub fn with_coefficient(self, coefficient: C<T>) -> Self {
        PauliString {
            coefficient,
            ..self
        }
    }

    pub(crate) fn masks(&self) -> (u64, u64) {
        (self.x, self.z)
    }

    /// Factors in ascending qubit order.
    pub fn factors(&self) -> Vec<(usize, Pauli)> {
        let support = self.x | self.z;
        (0..64)
            .filter(|q| support >> q & 1 == 1)
            .map(|q| {
                let p = match (self.x >> q & 1, self.z >> q & 1) {
                    (1, 0) => Pauli::X,
                    (0, 1) => Pauli::Z,
                    _ => Pauli::Y,
                };
                (q, p)
            })
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Highest qubit index touched, plus one.
    pub fn width(&self) -> usize {
        64 - (self.x | self.z).leading_zeros() as usize
    }

    fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Phase `c` such that `P|col> = c |col ^ x>` (coefficient included).
    #[inline]
    pub(crate) fn column_phase(&self, col: usize) -> C<T> {
        let sign_flips = (col as u64 & self.z).count_ones() & 1;
        let mut c = self.coefficient * i_pow::<T>(self.y_count());
        if sign_flips == 1 {
            c = -c;
        }
        c
    }

    /// Product `self * other`.
    pub fn multiply(&self, other: &Self) -> Self {
        // Write each string as i^{ny} X^x Z^z; moving Z^{z1} past X^{x2}
        // costs (-1)^{|z1 & x2|}.
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let ny_out = (x & z).count_ones();
        let power = self.y_count() + other.y_count() + 4 - (ny_out % 4);
        let mut coefficient = self.coefficient * other.coefficient * i_pow::<T>(power);
        if (self.z & other.x).count_ones() & 1 == 1 {
            coefficient = -coefficient;
        }
        PauliString { coefficient, x, z }
    }

    pub fn adjoint(&self) -> Self {
        PauliString {
            coefficient: self.coefficient.conj(),
            ..*self
        }
    }

    fn key(&self) -> (u64, u64) {
        (self.x, self.z)
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        let a = self.factors();
        let b = other.factors();
        a.len().cmp(&b.len()).then_with(|| a.cmp(&b))
    }
}

#[inline]
fn i_pow<T: Real>(k: u32) -> C<T> {
    match k % 4 {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), -T::one()),
    }
}

/// Weighted sum of Pauli strings on a fixed number of qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliOperator<T: Real = f64> {
    num_qubits: usize,
    terms: Vec<PauliString<T>>,
}

impl<T: Real> PauliOperator<T> {
    pub fn zero(num_qubits: usize) -> Self {
        PauliOperator {
            num_qubits,
            terms: Vec::new(),
        }
    }

    pub fn identity(num_qubits: usize) -> Self {
        Self::scaled_identity(num_qubits, T::one())
    }

    pub fn scaled_identity(num_qubits: usize, value: T) -> Self {
        PauliOperator {
            num_qubits,
            terms: vec![PauliString::identity(Complex::new(value, T::zero()))],
        }
    }

    pub fn from_terms(num_qubits: usize, terms: Vec<PauliString<T>>) -> Result<Self> {
        if num_qubits > 63 {
            return Err(Error::InvalidParams(format!(
                "{num_qubits} qubits exceeds the 63-qubit operator limit"
            )));
        }
        if let Some(t) = terms.iter().find(|t| t.width() > num_qubits) {
            return Err(Error::QubitOutOfRange {
                index: t.width() - 1,
                num_qubits,
            });
        }
        Ok(PauliOperator { num_qubits, terms })
    }

    /// Single-term operator `coefficient * P_q`.
    pub fn single(num_qubits: usize, qubit: usize, pauli: Pauli, coefficient: f64) -> Self {
        Self::from_terms(num_qubits, vec![PauliString::real(coefficient, &[(qubit, pauli)])])
            .expect("qubit within register")
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[PauliString<T>] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sum of coefficient magnitudes; an upper bound on the operator norm.
    pub fn coefficient_norm(&self) -> T {
        self.terms.iter().map(|t| t.coefficient.norm()).sum()
    }

    pub fn push(&mut self, term: PauliString<T>) {
        assert!(term.width() <= self.num_qubits, "term exceeds register");
        self.terms.push(term);
    }

    pub fn scale(&self, factor: C<T>) -> Self {
        PauliOperator {
            num_qubits: self.num_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| t.with_coefficient(t.coefficient * factor))
                .collect(),
        }
    }

    pub fn scale_real(&self, factor: T) -> Self {
        self.scale(Complex::new(factor, T::zero()))
    }

    /// The operator on the remaining qubits when each `(qubit, bit)` in
    /// `fixed` is frozen to the basis state `|bit>`. Remaining qubits keep
    /// their relative order.
    ///
    /// Only valid when the fixed qubits carry `I` or `Z` in every term, i.e.
    /// the operator cannot move them out of the frozen state.
    pub fn restrict(&self, fixed: &[(usize, bool)]) -> Result<Self> {
        let mut mask = 0u64;
        let mut ones = 0u64;
        for &(q, bit) in fixed {
            if q >= self.num_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    num_qubits: self.num_qubits,
                });
            }
            mask |= 1 << q;
            ones |= (bit as u64) << q;
        }
        let kept: Vec<usize> = (0..self.num_qubits).filter(|q| mask >> q & 1 == 0).collect();
        let squeeze = |m: u64| {
            kept.iter()
                .enumerate()
                .fold(0u64, |acc, (k, &q)| acc | ((m >> q & 1) << k))
        };
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            if t.x & mask != 0 {
                return Err(Error::InvalidParams(
                    "operator flips a qubit that is being held fixed".into(),
                ));
            }
            let mut coefficient = t.coefficient;
            if (t.z & ones).count_ones() % 2 == 1 {
                coefficient = -coefficient;
            }
            terms.push(PauliString {
                coefficient,
                x: squeeze(t.x),
                z: squeeze(t.z),
            });
        }
        Ok(PauliOperator {
            num_qubits: kept.len(),
            terms,
        }
        .simplify())
    }

    pub fn adjoint(&self) -> Self {
        PauliOperator {
            num_qubits: self.num_qubits,
            terms: self.terms.iter().map(PauliString::adjoint).collect(),
        }
    }

    /// Operator product, unsimplified.
    pub fn multiply(&self, other: &Self) -> Self {
        assert_eq!(self.num_qubits, other.num_qubits, "register size mismatch");
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(a.multiply(b));
            }
        }
        PauliOperator {
            num_qubits: self.num_qubits,
            terms,
        }
    }

    /// Merges duplicate strings, drops coefficients below `1e-14` in
    /// magnitude and sorts the remaining terms canonically.
    pub fn simplify(&self) -> Self {
        self.simplify_with_tolerance(T::lit(1e-14))
    }

    pub fn simplify_with_tolerance(&self, tol: T) -> Self {
        let mut merged: HashMap<(u64, u64), C<T>> = HashMap::with_capacity(self.terms.len());
        for t in &self.terms {
            *merged
                .entry(t.key())
                .or_insert_with(|| Complex::new(T::zero(), T::zero())) += t.coefficient;
        }
        let mut terms: Vec<PauliString<T>> = merged
            .into_iter()
            .filter(|(_, c)| c.norm() >= tol)
            .map(|((x, z), coefficient)| PauliString { coefficient, x, z })
            .collect();
        terms.sort_by(|a, b| a.canonical_cmp(b));
        PauliOperator {
            num_qubits: self.num_qubits,
            terms,
        }
    }

    /// `max |H - H^dagger|` over coefficients after simplification.
    pub fn hermiticity_residual(&self) -> T {
        let diff = (self.clone() - self.adjoint()).simplify_with_tolerance(T::zero());
        diff.terms
            .iter()
            .map(|t| t.coefficient.norm())
            .fold(T::zero(), T::max)
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermiticity_residual() <= tol
    }

    fn check_state(&self, state: &Statevector<T>) -> Result<()> {
        if state.num_qubits() != self.num_qubits {
            return Err(Error::SizeMismatch {
                expected: self.num_qubits,
                found: state.num_qubits(),
            });
        }
        Ok(())
    }

    /// `O|psi>` evaluated term by term.
    pub fn apply(&self, state: &Statevector<T>) -> Result<Statevector<T>> {
        self.check_state(state)?;
        let amps = state.amplitudes();
        let mut out = vec![Complex::new(T::zero(), T::zero()); amps.len()];
        for t in &self.terms {
            let x = t.x as usize;
            for (col, a) in amps.iter().enumerate() {
                out[col ^ x] += t.column_phase(col) * a;
            }
        }
        Statevector::from_amplitudes(out)
    }

    /// `<psi|O|psi>` without assuming Hermiticity.
    pub fn expectation_complex(&self, state: &Statevector<T>) -> Result<C<T>> {
        self.check_state(state)?;
        let amps = state.amplitudes();
        let mut total = Complex::new(T::zero(), T::zero());
        for t in &self.terms {
            let x = t.x as usize;
            let mut acc = Complex::new(T::zero(), T::zero());
            for (col, a) in amps.iter().enumerate() {
                acc += amps[col ^ x].conj() * t.column_phase(col) * a;
            }
            total += acc;
        }
        Ok(total)
    }

    /// Compressed sparse row form for repeated application.
    pub fn to_sparse(&self) -> SparseOperator<T> {
        SparseOperator::from_pauli(self)
    }

    /// Dense column-major `2^n x 2^n` matrix. Intended for small registers.
    pub fn to_dense(&self) -> Vec<C<T>> {
        let dim = 1usize << self.num_qubits;
        let mut m = vec![Complex::new(T::zero(), T::zero()); dim * dim];
        for t in &self.terms {
            let x = t.x as usize;
            for col in 0..dim {
                m[col * dim + (col ^ x)] += t.column_phase(col);
            }
        }
        m
    }

    /// One line per string: `(re, im)` followed by factor tokens such as
    /// `X3 Z7`, in canonical order.
    pub fn dump(&self) -> String {
        let mut sorted = self.terms.clone();
        sorted.sort_by(|a, b| a.canonical_cmp(b));
        let mut out = String::new();
        for t in &sorted {
            // adding zero folds -0 into 0
            let (re, im) = (t.coefficient.re + T::zero(), t.coefficient.im + T::zero());
            out.push_str(&format!("({re}, {im})"));
            for (q, p) in t.factors() {
                out.push_str(&format!(" {}{}", p.letter(), q));
            }
            out.push('\n');
        }
        out
    }

    /// Parses the [`dump`](Self::dump) format.
    pub fn parse_dump(num_qubits: usize, text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Parse(format!("line {}: {msg}", lineno + 1));
            let close = line.find(')').ok_or_else(|| err("missing ')'"))?;
            let inner = line
                .get(1..close)
                .filter(|_| line.starts_with('('))
                .ok_or_else(|| err("missing '('"))?;
            let (re, im) = inner.split_once(',').ok_or_else(|| err("missing ','"))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| err(&format!("bad number {s:?}")))
            };
            let coefficient = Complex::new(T::lit(parse(re)?), T::lit(parse(im)?));
            let mut factors = Vec::new();
            for token in line[close + 1..].split_whitespace() {
                let (letter, index) = token.split_at(1);
                let p = match letter {
                    "X" => Pauli::X,
                    "Y" => Pauli::Y,
                    "Z" => Pauli::Z,
                    _ => return Err(err(&format!("bad token {token:?}"))),
                };
                let q: usize = index
                    .parse()
                    .map_err(|_| err(&format!("bad token {token:?}")))?;
                if q >= num_qubits {
                    return Err(Error::QubitOutOfRange {
                        index: q,
                        num_qubits,
                    });
                }
                if factors.iter().any(|&(r, _)| r == q) {
                    return Err(err(&format!("qubit {q} repeated")));
                }
                factors.push((q, p));
            }
            terms.push(PauliString::new(coefficient, &factors));
        }
        Self::from_terms(num_qubits, terms)
    }
}

impl<T: Real> Add for PauliOperator<T> {
    type Output = PauliOperator<T>;

    fn add(mut self, rhs: Self) -> Self {
        assert_eq!(self.num_qubits, rhs.num_qubits, "register size mismatch");
        self.terms.extend(rhs.terms);
        self
    }
}

impl<T: Real> Sub for PauliOperator<T> {
    type Output = PauliOperator<T>;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Real> Neg for PauliOperator<T> {
    type Output = PauliOperator<T>;

    fn neg(self) -> Self {
        self.scale_real(-T::one())
    }
}

impl<T: Real> Mul for &PauliOperator<T> {
    type Output = PauliOperator<T>;

    fn mul(self, rhs: Self) -> PauliOperator<T> {
        self.multiply(rhs)
    }
}

impl<T: Real> fmt::Display for PauliOperator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}
