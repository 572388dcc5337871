//! Exact and incomplete `LDL^T` factorization of complex-symmetric matrices.
//!
//! All variants share one left-looking kernel. Column `j` is scattered into
//! a dense workspace, updated by every finished column `k` whose pattern
//! contains row `j`, and then scaled by the pivot. Updates that land outside
//! the prescribed pattern are discarded, or logged in the dropped-entry
//! matrix `E` when requested, so that `L D L^T = A + E` holds exactly.

use std::collections::HashMap;

use num_traits::{Float, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};
use crate::sparse::{bfs_distances, SymmetricMatrix};
use crate::symbolic::{fill_pattern_exact, symbolic_levels, Cutoff, FillPattern};

/// Relative pivot floor: a pivot below `PIVOT_FLOOR * max|A|` is a breakdown.
pub const PIVOT_FLOOR: f64 = 1e-12;

/// Unit lower-triangular `L` on a [`FillPattern`] together with the diagonal `D`.
#[derive(Clone, Debug)]
pub struct LdltFactors<S> {
    pattern: FillPattern,
    l: Vec<S>,
    d: Vec<S>,
    flops: u64,
}

impl<S: Scalar> LdltFactors<S> {
    pub fn n(&self) -> usize {
        self.d.len()
    }

    /// Structure of the strictly lower part of `L`.
    pub fn pattern(&self) -> &FillPattern {
        &self.pattern
    }

    /// Values of `L` aligned with the pattern's entry arrays.
    pub fn l_values(&self) -> &[S] {
        &self.l
    }

    pub fn d(&self) -> &[S] {
        &self.d
    }

    /// Multiply-add count of the numeric factorization.
    pub fn flops(&self) -> u64 {
        self.flops
    }

    /// `L(i, j)`: one on the diagonal, zero above it and outside the pattern.
    pub fn l(&self, i: usize, j: usize) -> S {
        if i == j {
            S::one()
        } else if i < j {
            S::zero()
        } else {
            self.pattern.position(i, j).map_or(S::zero(), |p| self.l[p])
        }
    }

    pub fn nnz_l(&self) -> usize {
        self.l.len()
    }

    /// The same factors with `L` stored on `pattern`, which must contain the
    /// current pattern. New positions hold zeros.
    ///
    /// Embedding into a closed pattern such as [`fill_closure`] of the
    /// current one lets selected inversion return exact entries of
    /// `(L D L^T)^{-1}`.
    ///
    /// [`fill_closure`]: crate::symbolic::fill_closure
    pub fn embed(&self, pattern: &FillPattern) -> Result<Self> {
        if pattern.n() != self.n() {
            return Err(Error::SizeMismatch { expected: self.n(), found: pattern.n() });
        }
        let mut l = vec![S::zero(); pattern.nnz()];
        for (p, (i, j, _)) in self.pattern.iter().enumerate() {
            let q = pattern.position(i, j).ok_or(Error::PatternMismatch { row: i, col: j })?;
            l[q] = self.l[p];
        }
        Ok(Self { pattern: pattern.clone(), l, d: self.d.clone(), flops: self.flops })
    }

    /// Solves `L D L^T x = b`.
    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let n = self.n();
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for j in 0..n {
            let xj = x[j];
            if xj != S::zero() {
                for p in self.pattern.col_range(j) {
                    x[self.pattern.row_indices()[p]] -= self.l[p] * xj;
                }
            }
        }
        for (xj, &dj) in x.iter_mut().zip(&self.d) {
            *xj /= dj;
        }
        for j in (0..n).rev() {
            let mut s = x[j];
            for p in self.pattern.col_range(j) {
                s -= self.l[p] * x[self.pattern.row_indices()[p]];
            }
            x[j] = s;
        }
        x
    }

    /// Lower triangle of `L D L^T` as a map from `(row, col)`.
    fn product_entries(&self) -> HashMap<(usize, usize), S> {
        let mut out: HashMap<(usize, usize), S> = HashMap::new();
        let rows = self.pattern.row_indices();
        for k in 0..self.n() {
            let dk = self.d[k];
            let col: Vec<(usize, S)> =
                std::iter::once((k, S::one())).chain(self.pattern.col_range(k).map(|p| (rows[p], self.l[p]))).collect();
            for (a, &(ia, la)) in col.iter().enumerate() {
                let f = la * dk;
                for &(ib, lb) in &col[..=a] {
                    *out.entry((ia, ib)).or_insert_with(S::zero) += f * lb;
                }
            }
        }
        out
    }

    /// `L D L^T` as a sparse symmetric matrix (numerical zeros removed).
    pub fn reconstruct(&self) -> SymmetricMatrix<S> {
        let entries: Vec<(usize, usize, S)> = self.product_entries().into_iter().map(|((i, j), v)| (i, j, v)).collect();
        SymmetricMatrix::from_triplets(self.n(), &entries).expect("product entries are lower triangular and unique")
    }

    /// `max |L D L^T - (A + E)|` over all entries.
    pub fn identity_residual(&self, a: &SymmetricMatrix<S>, e: Option<&DroppedEntries<S>>) -> S::Real {
        let mut p = self.product_entries();
        for (i, j, v) in a.iter() {
            *p.entry((i, j)).or_insert_with(S::zero) -= v;
        }
        if let Some(e) = e {
            for &(i, j, v) in &e.entries {
                *p.entry((i, j)).or_insert_with(S::zero) -= v;
            }
        }
        p.values().map(|v| v.modulus()).fold(S::Real::zero(), |a, b| a.max(b))
    }
}

/// The dropped-entry matrix `E` of an incomplete factorization.
///
/// Symmetric with zero diagonal; stored as strictly lower entries sorted by
/// column, then row. Entries are recorded structurally, so an update that
/// cancels to zero still appears.
#[derive(Clone, Debug, PartialEq)]
pub struct DroppedEntries<S> {
    n: usize,
    entries: Vec<(usize, usize, S)>,
}

impl<S: Scalar> DroppedEntries<S> {
    pub fn empty(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Strictly lower entries `(i, j, E(i, j))`, `i > j`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, S)> + '_ {
        self.entries.iter().copied()
    }

    /// Entries with nonzero value.
    pub fn nonzeros(&self) -> impl Iterator<Item = (usize, usize, S)> + '_ {
        self.iter().filter(|&(_, _, v)| v != S::zero())
    }

    pub fn max_abs(&self) -> S::Real {
        self.entries.iter().map(|e| e.2.modulus()).fold(S::Real::zero(), |a, b| a.max(b))
    }

    /// Largest absolute row sum, an upper bound on the spectral norm.
    pub fn gershgorin_norm(&self) -> S::Real {
        let mut rows = vec![S::Real::zero(); self.n];
        for &(i, j, v) in &self.entries {
            rows[i] += v.modulus();
            rows[j] += v.modulus();
        }
        rows.into_iter().fold(S::Real::zero(), |a, b| a.max(b))
    }

    pub fn to_matrix(&self) -> SymmetricMatrix<S> {
        let mut col_ptr = vec![0; self.n + 1];
        for &(_, j, _) in &self.entries {
            col_ptr[j + 1] += 1;
        }
        for j in 0..self.n {
            col_ptr[j + 1] += col_ptr[j];
        }
        SymmetricMatrix::from_sorted_columns(
            self.n,
            col_ptr,
            self.entries.iter().map(|e| e.0).collect(),
            self.entries.iter().map(|e| e.2).collect(),
        )
    }
}

#[derive(Clone, Copy)]
enum DropRule<R> {
    Pattern,
    Tolerance(R),
}

/// Exact factorization on the full fill pattern.
pub fn ldlt_exact<S: Scalar>(a: &SymmetricMatrix<S>) -> Result<LdltFactors<S>> {
    let pattern = fill_pattern_exact(a);
    Ok(left_looking(a, &pattern, DropRule::Pattern, false)?.0)
}

/// Incomplete factorization restricted to `pattern`.
///
/// `pattern` must contain every off-diagonal entry of `a`. With
/// `track_dropped` the discarded updates are returned as `E`.
pub fn ldlt_incomplete<S: Scalar>(
    a: &SymmetricMatrix<S>,
    pattern: &FillPattern,
    track_dropped: bool,
) -> Result<(LdltFactors<S>, Option<DroppedEntries<S>>)> {
    left_looking(a, pattern, DropRule::Pattern, track_dropped)
}

/// Incomplete factorization with level-of-fill cutoff `c`.
pub fn ldlt_level<S: Scalar>(
    a: &SymmetricMatrix<S>,
    c: u16,
    track_dropped: bool,
) -> Result<(LdltFactors<S>, Option<DroppedEntries<S>>)> {
    ldlt_incomplete(a, &symbolic_levels(a, Cutoff::Level(c)), track_dropped)
}

/// Incomplete factorization that drops computed entries with `|L(i,j)| < tau`.
///
/// A dropped entry contributes its unscaled value to `E`, keeping
/// `L D L^T = A + E` exact. `tau = 0` gives the exact factors and
/// `tau = inf` drops all off-diagonal entries.
pub fn ldlt_incomplete_tol<S: Scalar>(
    a: &SymmetricMatrix<S>,
    tau: S::Real,
    track_dropped: bool,
) -> Result<(LdltFactors<S>, Option<DroppedEntries<S>>)> {
    let pattern = fill_pattern_exact(a);
    left_looking(a, &pattern, DropRule::Tolerance(tau), track_dropped)
}

fn left_looking<S: Scalar>(
    a: &SymmetricMatrix<S>,
    candidates: &FillPattern,
    rule: DropRule<S::Real>,
    track: bool,
) -> Result<(LdltFactors<S>, Option<DroppedEntries<S>>)> {
    let n = a.n();
    if candidates.n() != n {
        return Err(Error::SizeMismatch { expected: n, found: candidates.n() });
    }
    let floor = a.max_abs() * S::Real::of(PIVOT_FLOOR);

    let mut col_ptr = Vec::with_capacity(n + 1);
    let mut row_idx = Vec::with_capacity(candidates.nnz());
    let mut levels = Vec::with_capacity(candidates.nnz());
    let mut l: Vec<S> = Vec::with_capacity(candidates.nnz());
    let mut d: Vec<S> = Vec::with_capacity(n);
    let mut flops = 0u64;
    // rows[j]: (column k, position of L(j, k)) for finished columns k < j.
    let mut rows: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];

    let mut w = vec![S::zero(); n];
    let mut mark = vec![usize::MAX; n];
    let mut dw = vec![S::zero(); n];
    let mut dmark = vec![usize::MAX; n];
    let mut dtouched: Vec<usize> = Vec::new();
    let mut dropped: Vec<(usize, usize, S)> = Vec::new();
    let mut col_dropped: Vec<(usize, usize, S)> = Vec::new();
    col_ptr.push(0);

    for j in 0..n {
        for &i in candidates.col_rows(j) {
            mark[i] = j;
        }
        w[j] = S::zero();
        for (&i, &v) in a.col_rows(j).iter().zip(a.col_values(j)) {
            if i != j && mark[i] != j {
                return Err(Error::PatternMismatch { row: i, col: j });
            }
            w[i] = v;
        }

        for &(k, p) in &rows[j] {
            let ljk = l[p];
            let f = ljk * d[k];
            w[j] -= f * ljk;
            flops += 2;
            for q in p + 1..col_ptr[k + 1] {
                let i = row_idx[q];
                let u = l[q] * f;
                if mark[i] == j {
                    w[i] -= u;
                    flops += 1;
                } else if track {
                    if dmark[i] != j {
                        dmark[i] = j;
                        dw[i] = S::zero();
                        dtouched.push(i);
                    }
                    dw[i] -= u;
                }
            }
        }

        let dj = w[j];
        w[j] = S::zero();
        if !(dj.modulus() >= floor) || dj.modulus() == S::Real::zero() {
            return Err(Error::PivotBreakdown { column: j, magnitude: dj.modulus().as_f64(), floor: floor.as_f64() });
        }
        d.push(dj);

        for (&i, &lev) in candidates.col_rows(j).iter().zip(candidates.col_levels(j)) {
            let wi = w[i];
            w[i] = S::zero();
            let v = wi / dj;
            flops += 1;
            let keep = match rule {
                DropRule::Pattern => true,
                DropRule::Tolerance(tau) => !(v.modulus() < tau),
            };
            if keep {
                rows[i].push((j, row_idx.len()));
                row_idx.push(i);
                levels.push(lev);
                l.push(v);
            } else if track {
                col_dropped.push((i, j, -wi));
            }
        }
        if track {
            for &i in &dtouched {
                col_dropped.push((i, j, -dw[i]));
            }
            dtouched.clear();
            col_dropped.sort_unstable_by_key(|e| e.0);
            dropped.append(&mut col_dropped);
        }
        col_ptr.push(row_idx.len());
    }

    let pattern = FillPattern::from_parts(n, col_ptr, row_idx, levels, candidates.cutoff());
    let factors = LdltFactors { pattern, l, d, flops };
    Ok((factors, track.then_some(DroppedEntries { n, entries: dropped })))
}

/// Entrywise a-posteriori bound on `|A^{-1} - (A + E)^{-1}|` over the
/// pattern of `a`.
///
/// For each stored `(i, j)` of `a` the bound is
/// `sum exp(-g (d(i, p) + d(q, j))) |E(p, q)| + |E|^2 / (delta^2 (delta - |E|))`
/// with graph distances `d` in `a`, the sum running over both orientations of
/// every dropped entry, and `|E|` the Gershgorin estimate of the spectral
/// norm. The constant prefactor of the underlying decay estimate is taken as 1.
pub fn aposteriori_inverse_bound<S: Scalar>(
    a: &SymmetricMatrix<S>,
    e: &DroppedEntries<S>,
    g: f64,
    delta: f64,
) -> Result<SymmetricMatrix<f64>> {
    let n = a.n();
    if e.n() != n {
        return Err(Error::SizeMismatch { expected: n, found: e.n() });
    }
    let norm = e.gershgorin_norm().as_f64();
    if !(norm < delta) {
        return Err(Error::HypothesisViolated { norm, delta });
    }
    let tail = if norm == 0.0 { 0.0 } else { norm * norm / (delta * delta * (delta - norm)) };

    let adj = a.adjacency();
    let mut decay: HashMap<usize, Vec<f64>> = HashMap::new();
    for (p, q, _) in e.nonzeros() {
        for v in [p, q] {
            decay.entry(v).or_insert_with(|| {
                bfs_distances(&adj, v).into_iter().map(|d| d.map_or(0.0, |d| (-g * d as f64).exp())).collect()
            });
        }
    }
    let support: Vec<(&[f64], &[f64], f64)> = e
        .nonzeros()
        .map(|(p, q, v)| (decay[&p].as_slice(), decay[&q].as_slice(), v.modulus().as_f64()))
        .collect();

    let values: Vec<f64> = a
        .iter()
        .map(|(i, j, _)| {
            let s: f64 = support.iter().map(|&(up, uq, m)| (up[i] * uq[j] + uq[i] * up[j]) * m).sum();
            s + tail
        })
        .collect();
    Ok(SymmetricMatrix::from_sorted_columns(n, a.col_ptr().to_vec(), a.row_indices().to_vec(), values))
}
