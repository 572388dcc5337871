//! Compressed storage for sparse symmetric matrices.
//!
//! Only the lower triangle (diagonal included) is stored, column by column,
//! with strictly increasing row indices. Lookups of upper-triangle entries
//! resolve through the mirrored lower entry. "Symmetric" means `A = A^T`,
//! which for complex scalars is complex-symmetric rather than Hermitian.

use std::collections::{BTreeMap, VecDeque};

use num_complex::Complex;
use num_traits::Float;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Sparse symmetric matrix, lower triangle stored column-wise.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix<S> {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<S>,
}

impl<S: Scalar> SymmetricMatrix<S> {
    /// The `n x n` zero matrix.
    pub fn zeros(n: usize) -> Self {
        Self { n, col_ptr: vec![0; n + 1], row_idx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![S::one(); n])
    }

    pub fn from_diagonal(diag: &[S]) -> Self {
        let entries: Vec<_> = diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(diag.len(), &entries).expect("diagonal entries are in range")
    }

    /// Assembles a matrix from `(row, col, value)` triplets.
    ///
    /// Triplets may address either triangle. Repeated triplets with the same
    /// orientation are summed; when a pair is given in both orientations the
    /// two sums must agree, otherwise the input is rejected. Explicit zeros
    /// are dropped.
    pub fn from_triplets(n: usize, entries: &[(usize, usize, S)]) -> Result<Self> {
        // (col, row) -> (sum given as lower, sum given as upper)
        let mut acc: BTreeMap<(usize, usize), (Option<S>, Option<S>)> = BTreeMap::new();
        for &(i, j, v) in entries {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange { row: i, col: j, n });
            }
            let (r, c) = if i >= j { (i, j) } else { (j, i) };
            let slot = acc.entry((c, r)).or_insert((None, None));
            let side = if i >= j { &mut slot.0 } else { &mut slot.1 };
            *side = Some(side.map_or(v, |s| s + v));
        }

        let mut col_ptr = vec![0usize; n + 1];
        let mut row_idx = Vec::with_capacity(acc.len());
        let mut values = Vec::with_capacity(acc.len());
        for ((c, r), (lower, upper)) in acc {
            let v = match (lower, upper) {
                (Some(a), Some(b)) => {
                    if a != b {
                        return Err(Error::AsymmetricDuplicate { row: r, col: c });
                    }
                    a
                }
                (Some(a), None) | (None, Some(a)) => a,
                (None, None) => unreachable!(),
            };
            if v != S::zero() {
                col_ptr[c + 1] += 1;
                row_idx.push(r);
                values.push(v);
            }
        }
        for j in 0..n {
            col_ptr[j + 1] += col_ptr[j];
        }
        Ok(Self { n, col_ptr, row_idx, values })
    }

    /// Builds a matrix from already sorted lower-triangle columns.
    ///
    /// Used by kernels that produce canonical columns directly; zeros are
    /// kept, which callers rely on for structural patterns.
    pub(crate) fn from_sorted_columns(n: usize, col_ptr: Vec<usize>, row_idx: Vec<usize>, values: Vec<S>) -> Self {
        debug_assert_eq!(col_ptr.len(), n + 1);
        debug_assert!((0..n).all(|j| {
            let rows = &row_idx[col_ptr[j]..col_ptr[j + 1]];
            rows.windows(2).all(|w| w[0] < w[1]) && rows.iter().all(|&i| i >= j && i < n)
        }));
        Self { n, col_ptr, row_idx, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored lower-triangle entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored rows of column `j` (all `>= j`).
    pub fn col_rows(&self, j: usize) -> &[usize] {
        &self.row_idx[self.col_ptr[j]..self.col_ptr[j + 1]]
    }

    pub fn col_values(&self, j: usize) -> &[S] {
        &self.values[self.col_ptr[j]..self.col_ptr[j + 1]]
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_indices(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    /// Iterates stored lower-triangle entries as `(row, col, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, S)> + '_ {
        (0..self.n).flat_map(move |j| {
            self.col_rows(j).iter().zip(self.col_values(j)).map(move |(&i, &v)| (i, j, v))
        })
    }

    /// Entry lookup with symmetric semantics; absent entries are zero.
    pub fn get(&self, i: usize, j: usize) -> S {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        match self.col_rows(c).binary_search(&r) {
            Ok(p) => self.col_values(c)[p],
            Err(_) => S::zero(),
        }
    }

    /// Whether `(i, j)` (either triangle) is a stored entry.
    pub fn contains(&self, i: usize, j: usize) -> bool {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.col_rows(c).binary_search(&r).is_ok()
    }

    pub fn diagonal(&self) -> Vec<S> {
        (0..self.n)
            .map(|j| match self.col_rows(j).first() {
                Some(&i) if i == j => self.col_values(j)[0],
                _ => S::zero(),
            })
            .collect()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> S::Real {
        self.values.iter().map(|v| v.modulus()).fold(<S::Real as num_traits::Zero>::zero(), |a, b| a.max(b))
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.n, "vector length");
        let mut y = vec![S::zero(); self.n];
        for (i, j, v) in self.iter() {
            y[i] += v * x[j];
            if i != j {
                y[j] += v * x[i];
            }
        }
        y
    }

    /// Returns `A - z I`, creating diagonal entries where absent.
    pub fn shift(&self, z: S) -> Self {
        let mut col_ptr = Vec::with_capacity(self.n + 1);
        let mut row_idx = Vec::with_capacity(self.nnz() + self.n);
        let mut values = Vec::with_capacity(self.nnz() + self.n);
        col_ptr.push(0);
        for j in 0..self.n {
            let rows = self.col_rows(j);
            let vals = self.col_values(j);
            if rows.first() == Some(&j) {
                row_idx.push(j);
                values.push(vals[0] - z);
                row_idx.extend_from_slice(&rows[1..]);
                values.extend_from_slice(&vals[1..]);
            } else {
                row_idx.push(j);
                values.push(-z);
                row_idx.extend_from_slice(rows);
                values.extend_from_slice(vals);
            }
            col_ptr.push(row_idx.len());
        }
        Self { n: self.n, col_ptr, row_idx, values }
    }

    /// Applies `f` to every stored value, keeping the structure.
    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T) -> SymmetricMatrix<T> {
        SymmetricMatrix {
            n: self.n,
            col_ptr: self.col_ptr.clone(),
            row_idx: self.row_idx.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn to_c64(&self) -> SymmetricMatrix<Complex<f64>> {
        self.map(Scalar::to_c64)
    }

    /// Whether every stored value has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im() == <S::Real as num_traits::Zero>::zero())
    }

    pub fn to_dense(&self) -> DenseMatrix<S> {
        let mut d = DenseMatrix::zeros(self.n);
        for (i, j, v) in self.iter() {
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
        d
    }

    /// Neighbour lists of the matrix graph (off-diagonal entries only).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for (i, j, _) in self.iter() {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    /// Edge count of a shortest path between `i` and `j` in the matrix
    /// graph, `None` if they are disconnected.
    pub fn graph_distance(&self, i: usize, j: usize) -> Option<usize> {
        bfs_distances(&self.adjacency(), i)[j]
    }
}

/// Breadth-first distances from `source`; `None` marks unreachable vertices.
pub fn bfs_distances(adj: &[Vec<usize>], source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    let mut queue = VecDeque::new();
    dist[source] = Some(0);
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        let dv = dist[v].unwrap();
        for &w in &adj[v] {
            if dist[w].is_none() {
                dist[w] = Some(dv + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;
    use proptest::prelude::*;

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    #[test]
    fn builds_tridiagonal_block() {
        let a = SymmetricMatrix::from_triplets(2, &[(0, 0, c(3.0)), (1, 0, c(-1.0)), (1, 1, c(3.0))]).unwrap();
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(0, 1), c(-1.0));
        assert_eq!(a.get(1, 0), c(-1.0));
        assert_eq!(a.get(1, 1), c(3.0));
    }

    #[test]
    fn sums_duplicates() {
        let a = SymmetricMatrix::from_triplets(2, &[(0, 0, c(1.0)), (0, 0, c(2.0))]).unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 0), c(3.0));
    }

    #[test]
    fn rejects_out_of_range() {
        let err = SymmetricMatrix::from_triplets(2, &[(2, 0, c(1.0))]).unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange { row: 2, col: 0, n: 2 }));
        assert!(err.to_string().contains("(3, 1)"));
    }

    #[test]
    fn mirrors_upper_entries_and_checks_agreement() {
        let a = SymmetricMatrix::from_triplets(3, &[(0, 2, c(5.0))]).unwrap();
        assert_eq!(a.col_rows(0), &[2]);
        assert_eq!(a.get(2, 0), c(5.0));

        let ok = SymmetricMatrix::from_triplets(3, &[(0, 2, c(5.0)), (2, 0, c(5.0))]).unwrap();
        assert_eq!(ok.get(0, 2), c(5.0));

        let err = SymmetricMatrix::from_triplets(3, &[(0, 2, c(5.0)), (2, 0, c(4.0))]).unwrap_err();
        assert!(matches!(err, Error::AsymmetricDuplicate { row: 2, col: 0 }));
    }

    #[test]
    fn strips_explicit_zeros() {
        let a = SymmetricMatrix::from_triplets(2, &[(1, 0, c(1.0)), (1, 0, c(-1.0)), (0, 0, c(0.0))]).unwrap();
        assert_eq!(a.nnz(), 0);
    }

    #[test]
    fn shift_creates_missing_diagonal() {
        let z = C::new(1.0, 2.0);
        let a = SymmetricMatrix::<C>::zeros(3).shift(z);
        assert_eq!(a.diagonal(), vec![C::new(-1.0, -2.0); 3]);
        let b = SymmetricMatrix::from_triplets(2, &[(1, 0, c(1.0)), (1, 1, c(2.0))]).unwrap().shift(z);
        assert_eq!(b.diagonal(), vec![-z, c(2.0) - z]);
        assert_eq!(b.get(0, 1), c(1.0));
    }

    #[test]
    fn graph_distances() {
        let a = SymmetricMatrix::from_triplets(2, &[(0, 0, c(1.0)), (1, 1, c(1.0))]).unwrap();
        assert_eq!(a.graph_distance(0, 0), Some(0));
        assert_eq!(a.graph_distance(0, 1), None);
    }

    proptest! {
        #[test]
        fn lookup_is_symmetric(entries in proptest::collection::vec((0usize..12, 0usize..12, -5i32..5), 0..60)) {
            let trip: Vec<_> = entries.iter().map(|&(i, j, v)| (i.max(j), i.min(j), c(v as f64))).collect();
            let a = SymmetricMatrix::from_triplets(12, &trip).unwrap();
            for i in 0..12 {
                for j in 0..12 {
                    prop_assert_eq!(a.get(i, j), a.get(j, i));
                }
            }
            for j in 0..12 {
                let rows = a.col_rows(j);
                prop_assert!(rows.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(rows.iter().all(|&i| i >= j));
                prop_assert!(a.col_values(j).iter().all(|v| *v != c(0.0)));
            }
        }

        #[test]
        fn matvec_matches_dense(seed in 0u64..1000, n in 1usize..40) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut trip = Vec::new();
            for _ in 0..3 * n {
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..=i);
                trip.push((i, j, C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
            }
            let a = SymmetricMatrix::from_triplets(n, &trip).unwrap();
            let x: Vec<C> = (0..n).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let y = a.matvec(&x);
            let yd = a.to_dense().matvec(&x);
            for (u, v) in y.iter().zip(&yd) {
                prop_assert!((u - v).norm() <= 1e-13);
            }
        }
    }
}
