use std::collections::BTreeMap;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::operators::pauli::PauliOperator;
use crate::scalar::{Real, C};
use crate::statevector::Statevector;

/// Compressed sparse row matrix compiled from a [`PauliOperator`].
///
/// Each row holds one entry per distinct X-mask of the source operator, with
/// exact cancellations removed.
#[derive(Clone, Debug)]
pub struct SparseOperator<T: Real = f64> {
    num_qubits: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C<T>>,
}

struct MaskGroup<T: Real> {
    x: usize,
    // (z mask, coefficient * i^{ny})
    parts: Vec<(u64, C<T>)>,
}

impl<T: Real> SparseOperator<T> {
    pub fn from_pauli(op: &PauliOperator<T>) -> Self {
        let n = op.num_qubits();
        let dim = 1usize << n;
        let mut groups: BTreeMap<u64, MaskGroup<T>> = BTreeMap::new();
        let mut scale = T::one();
        for t in op.terms() {
            let (x, z) = t.masks();
            scale = scale.max(t.coefficient().norm());
            groups
                .entry(x)
                .or_insert_with(|| MaskGroup {
                    x: x as usize,
                    parts: Vec::new(),
                })
                .parts
                .push((z, t.column_phase(0)));
        }
        let drop_below = T::lit(T::ZERO_TOL) * scale;
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in 0..dim {
            for g in groups.values() {
                let col = row ^ g.x;
                let mut v = Complex::new(T::zero(), T::zero());
                for &(z, c) in &g.parts {
                    if (col as u64 & z).count_ones() & 1 == 1 {
                        v -= c;
                    } else {
                        v += c;
                    }
                }
                if v.norm() > drop_below {
                    cols.push(col);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        SparseOperator {
            num_qubits: n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `(column, value)` pairs of one row.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, C<T>)> + '_ {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.vals[range].iter().copied())
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim()).all(|r| self.row(r).all(|(c, _)| c == r))
    }

    /// Largest `|Im|` over stored entries.
    pub fn max_imag(&self) -> T {
        self.vals.iter().map(|v| v.im.abs()).fold(T::zero(), T::max)
    }

    /// `out = A x`.
    pub fn apply_into(&self, x: &[C<T>], out: &mut [C<T>]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        for (row, o) in out.iter_mut().enumerate() {
            let mut acc = Complex::new(T::zero(), T::zero());
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *o = acc;
        }
    }

    pub fn apply_vec(&self, x: &[C<T>]) -> Vec<C<T>> {
        let mut out = vec![Complex::new(T::zero(), T::zero()); x.len()];
        self.apply_into(x, &mut out);
        out
    }

    pub fn apply(&self, state: &Statevector<T>) -> Result<Statevector<T>> {
        self.check(state)?;
        Statevector::from_amplitudes(self.apply_vec(state.amplitudes()))
    }

    /// `<x|A|x>` on a raw amplitude slice.
    pub fn quadratic_form(&self, x: &[C<T>]) -> C<T> {
        let mut total = Complex::new(T::zero(), T::zero());
        for (row, xr) in x.iter().enumerate() {
            let mut acc = Complex::new(T::zero(), T::zero());
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            total += xr.conj() * acc;
        }
        total
    }

    pub fn expectation(&self, state: &Statevector<T>) -> Result<T> {
        self.check(state)?;
        Ok(self.quadratic_form(state.amplitudes()).re)
    }

    fn check(&self, state: &Statevector<T>) -> Result<()> {
        if state.num_qubits() != self.num_qubits {
            return Err(Error::SizeMismatch {
                expected: self.num_qubits,
                found: state.num_qubits(),
            });
        }
        Ok(())
    }
}
