//! Dense matrices used as brute-force oracles.
//!
//! Everything here is O(n^3) and capped at [`ORACLE_CAP`] unknowns.

use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

/// Largest matrix size accepted by the dense oracles.
pub const ORACLE_CAP: usize = 2048;

/// Square dense matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<S> {
    n: usize,
    data: Vec<S>,
}

impl<S: Scalar> DenseMatrix<S> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![S::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[S]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row slices.
    pub fn from_rows(rows: &[Vec<S>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "rows must form a square matrix");
        Self { n, data: rows.concat() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn matvec(&self, x: &[S]) -> Vec<S> {
        (0..self.n).map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum()).collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == S::zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Entrywise `self - other`.
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self { n: self.n, data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect() }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> S::Real {
        self.data.iter().map(|v| v.modulus()).fold(<S::Real as num_traits::Zero>::zero(), |a, b| a.max(b))
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        if n > ORACLE_CAP {
            return Err(Error::OracleCap { n, cap: ORACLE_CAP });
        }
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.max_abs();
        let tiny = scale * <S::Real as num_traits::Float>::epsilon() * S::Real::of(n.max(1) as f64);
        for col in 0..n {
            let (piv, mag) = (col..n)
                .map(|r| (r, a[(r, col)].modulus()))
                .fold((col, <S::Real as num_traits::Zero>::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(mag > tiny) {
                return Err(Error::Singular { column: col });
            }
            if piv != col {
                a.swap_rows(piv, col);
                inv.swap_rows(piv, col);
            }
            let d = S::one() / a[(col, col)];
            a.scale_row(col, d);
            inv.scale_row(col, d);
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == S::zero() {
                    continue;
                }
                a.axpy_row(r, col, f);
                inv.axpy_row(r, col, f);
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        let n = self.n;
        for k in 0..n {
            self.data.swap(a * n + k, b * n + k);
        }
    }

    fn scale_row(&mut self, r: usize, f: S) {
        let n = self.n;
        for v in &mut self.data[r * n..(r + 1) * n] {
            *v *= f;
        }
    }

    /// row[dst] -= f * row[src]
    fn axpy_row(&mut self, dst: usize, src: usize, f: S) {
        let n = self.n;
        for k in 0..n {
            let s = self.data[src * n + k];
            self.data[dst * n + k] -= f * s;
        }
    }

    /// Copies a real symmetric matrix into an `f64` nalgebra matrix.
    fn to_real_symmetric(&self) -> Result<DMatrix<f64>> {
        let n = self.n;
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let v = self[(i, j)].to_c64();
                if v.im != 0.0 || v != self[(j, i)].to_c64() {
                    return Err(Error::NotRealSymmetric);
                }
                m[(i, j)] = v.re;
            }
        }
        Ok(m)
    }
}

impl<S> Index<(usize, usize)> for DenseMatrix<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.n + j]
    }
}

impl<S> IndexMut<(usize, usize)> for DenseMatrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.n + j]
    }
}

/// Dense inverse; see [`DenseMatrix::inverse`].
pub fn dense_inverse<S: Scalar>(a: &DenseMatrix<S>) -> Result<DenseMatrix<S>> {
    a.inverse()
}

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit eigenvector of `values[k]`.
    pub vectors: Vec<Vec<f64>>,
}

/// Full eigendecomposition of a real symmetric matrix.
pub fn eigendecomposition<S: Scalar>(a: &DenseMatrix<S>) -> Result<Eigen> {
    if a.n() > ORACLE_CAP {
        return Err(Error::OracleCap { n: a.n(), cap: ORACLE_CAP });
    }
    let m = a.to_real_symmetric()?;
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..a.n()).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    Ok(Eigen {
        values: order.iter().map(|&k| eig.eigenvalues[k]).collect(),
        vectors: order.iter().map(|&k| eig.eigenvectors.column(k).iter().copied().collect()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    #[test]
    fn inverse_of_identity_and_diagonal() {
        let i = DenseMatrix::<f64>::identity(4);
        assert_eq!(i.inverse().unwrap(), i);
        let d = DenseMatrix::from_diagonal(&[2.0, 4.0]).inverse().unwrap();
        assert_eq!(d, DenseMatrix::from_diagonal(&[0.5, 0.25]));
    }

    #[test]
    fn inverse_residual_complex() {
        let a = DenseMatrix::from_rows(&[
            vec![C::new(1.0, 1.0), C::new(2.0, 0.0), C::new(0.0, -1.0)],
            vec![C::new(2.0, 0.0), C::new(0.5, 0.0), C::new(3.0, 0.0)],
            vec![C::new(0.0, -1.0), C::new(3.0, 0.0), C::new(-1.0, 2.0)],
        ]);
        let inv = a.inverse().unwrap();
        let r = a.matmul(&inv).sub(&DenseMatrix::identity(3));
        assert!(r.max_abs() < 1e-14);
    }

    #[test]
    fn singular_detected() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(a.inverse(), Err(Error::Singular { .. })));
    }

    #[test]
    fn eigen_of_diagonal_and_swap() {
        let e = eigendecomposition(&DenseMatrix::from_diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        assert_eq!(e.vectors[0].iter().map(|v| v.abs()).collect::<Vec<_>>(), vec![0.0, 1.0, 0.0]);

        let e = eigendecomposition(&DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigen_rejects_complex() {
        let a = DenseMatrix::from_diagonal(&[C::new(1.0, 1.0)]);
        assert!(matches!(eigendecomposition(&a), Err(Error::NotRealSymmetric)));
    }

    #[test]
    fn oracle_cap_enforced() {
        let a = DenseMatrix::<f64>::zeros(ORACLE_CAP + 1);
        assert!(matches!(a.inverse(), Err(Error::OracleCap { .. })));
    }
}
