//! Scalar abstraction shared by every numeric kernel in the crate.
//!
//! All state, operator and optimizer code is written against [`Real`], which
//! is implemented for `f32` and `f64`. Dense linear algebra (symmetric
//! eigensolves, singular values) is routed through the trait so that generic
//! code never needs to name a particular linear-algebra backend.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real floating-point scalar used for amplitudes, coefficients and angles.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Machine-level tolerance the crate treats as "numerically zero" for this type.
    const ZERO_TOL: f64;

    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    /// Eigen-decomposition of a dense real symmetric matrix stored column-major.
    ///
    /// Returns eigenvalues in ascending order and the matching eigenvectors
    /// as consecutive columns of a column-major `dim x dim` buffer.
    fn symmetric_eigen(dim: usize, matrix: Vec<Self>) -> (Vec<Self>, Vec<Self>);

    /// Eigenvalues only (ascending) of a dense real symmetric matrix.
    fn symmetric_eigenvalues(dim: usize, matrix: Vec<Self>) -> Vec<Self>;

    /// Eigen-decomposition of a dense complex Hermitian matrix stored column-major.
    fn hermitian_eigen(dim: usize, matrix: Vec<Complex<Self>>) -> (Vec<Self>, Vec<Complex<Self>>);

    /// Singular values of a dense complex `rows x cols` matrix stored column-major.
    fn singular_values(rows: usize, cols: usize, matrix: Vec<Complex<Self>>) -> Vec<Self>;
}

fn sort_permutation<T: PartialOrd + Copy>(values: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    order
}

macro_rules! impl_real {
    ($t:ty, $tol:expr) => {
        impl Real for $t {
            const ZERO_TOL: f64 = $tol;

            fn symmetric_eigen(dim: usize, matrix: Vec<Self>) -> (Vec<Self>, Vec<Self>) {
                let m = DMatrix::from_vec(dim, dim, matrix);
                let eig = SymmetricEigen::new(m);
                let order = sort_permutation(eig.eigenvalues.as_slice());
                let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
                let mut vectors = Vec::with_capacity(dim * dim);
                for &i in &order {
                    vectors.extend_from_slice(eig.eigenvectors.column(i).as_slice());
                }
                (values, vectors)
            }

            fn symmetric_eigenvalues(dim: usize, matrix: Vec<Self>) -> Vec<Self> {
                let m = DMatrix::from_vec(dim, dim, matrix);
                let mut values: Vec<Self> = m.symmetric_eigenvalues().iter().copied().collect();
                values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
                values
            }

            fn hermitian_eigen(
                dim: usize,
                matrix: Vec<Complex<Self>>,
            ) -> (Vec<Self>, Vec<Complex<Self>>) {
                let m = DMatrix::from_vec(dim, dim, matrix);
                let eig = SymmetricEigen::new(m);
                let order = sort_permutation(eig.eigenvalues.as_slice());
                let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
                let mut vectors = Vec::with_capacity(dim * dim);
                for &i in &order {
                    vectors.extend(eig.eigenvectors.column(i).iter().copied());
                }
                (values, vectors)
            }

            fn singular_values(rows: usize, cols: usize, matrix: Vec<Complex<Self>>) -> Vec<Self> {
                let m = DMatrix::from_vec(rows, cols, matrix);
                m.singular_values().iter().copied().collect()
            }
        }
    };
}

impl_real!(f64, 1e-14);
impl_real!(f32, 1e-6);

/// Complex amplitude over a [`Real`] scalar.
pub type C<T> = Complex<T>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_eigen_sorted_and_orthonormal() {
        // [[2, 1], [1, 2]] has eigenvalues 1 and 3.
        let (vals, vecs) = f64::symmetric_eigen(2, vec![2.0, 1.0, 1.0, 2.0]);
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
        let dot = vecs[0] * vecs[2] + vecs[1] * vecs[3];
        assert!(dot.abs() < 1e-12);
        let eigs = f64::symmetric_eigenvalues(2, vec![2.0, 1.0, 1.0, 2.0]);
        assert!((eigs[0] - 1.0).abs() < 1e-12 && (eigs[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn hermitian_eigen_of_pauli_y() {
        let m = vec![
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 1.0),
            Complex::new(0.0, -1.0),
            Complex::new(0.0, 0.0),
        ];
        let (vals, _) = f64::hermitian_eigen(2, m);
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_values_of_rank_one() {
        let m = vec![
            Complex::new(0.6, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.8, 0.0),
            Complex::new(0.0, 0.0),
        ];
        let mut s = f32::singular_values(2, 2, m);
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((s[0] - 1.0).abs() < 1e-5);
        assert!(s[1].abs() < 1e-5);
    }
}
