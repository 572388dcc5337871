//! Selected inversion: entries of `A^{-1}` on the pattern of the factors.
//!
//! Columns are processed from last to first. Column `j` only needs inverse
//! entries among the rows of `L(:, j)`, all of which belong to later columns.
//! On the exact fill pattern these are always available; on a truncated
//! pattern some of them were never computed and are read as zero, and the
//! updates they would have received are optionally collected in `F`.

use num_traits::{Float, Zero};

use crate::error::{Error, Result};
use crate::factorization::LdltFactors;
use crate::scalar::{Real, Scalar};
use crate::sparse::SymmetricMatrix;
use crate::symbolic::{fill_closure, Cutoff, FillPattern};

/// Inverse entries on the diagonal and on the strictly lower factor pattern.
#[derive(Clone, Debug)]
pub struct SelectedInverse<S> {
    pattern: FillPattern,
    values: Vec<S>,
    diag: Vec<S>,
    exact: bool,
    flops: u64,
}

impl<S: Scalar> SelectedInverse<S> {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn pattern(&self) -> &FillPattern {
        &self.pattern
    }

    pub fn diagonal(&self) -> &[S] {
        &self.diag
    }

    /// Off-diagonal values aligned with the pattern's entry arrays.
    pub fn values(&self) -> &[S] {
        &self.values
    }

    /// Whether the factors covered the full fill pattern.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn flops(&self) -> u64 {
        self.flops
    }

    /// Computed entry `(i, j)` in either triangle, `None` off the pattern.
    pub fn get(&self, i: usize, j: usize) -> Option<S> {
        if i == j {
            return Some(self.diag[i]);
        }
        let (r, c) = if i > j { (i, j) } else { (j, i) };
        self.pattern.position(r, c).map(|p| self.values[p])
    }

    pub fn to_matrix(&self) -> SymmetricMatrix<S> {
        let n = self.n();
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut rows = Vec::with_capacity(n + self.values.len());
        let mut vals = Vec::with_capacity(n + self.values.len());
        col_ptr.push(0);
        for j in 0..n {
            rows.push(j);
            vals.push(self.diag[j]);
            for p in self.pattern.col_range(j) {
                rows.push(self.pattern.row_indices()[p]);
                vals.push(self.values[p]);
            }
            col_ptr.push(rows.len());
        }
        SymmetricMatrix::from_sorted_columns(n, col_ptr, rows, vals)
    }
}

/// The dropped-entry matrix `F` of incomplete selected inversion.
///
/// Off-diagonal entries `(i, j)`, `i > j`, sorted by column, then row, and
/// diagonal corrections `(j, F(j, j))`.
#[derive(Clone, Debug, PartialEq)]
pub struct DroppedInverseEntries<S> {
    n: usize,
    offdiag: Vec<(usize, usize, S)>,
    diag: Vec<(usize, S)>,
}

impl<S: Scalar> DroppedInverseEntries<S> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offdiag(&self) -> &[(usize, usize, S)] {
        &self.offdiag
    }

    pub fn diag(&self) -> &[(usize, S)] {
        &self.diag
    }

    pub fn is_empty(&self) -> bool {
        self.offdiag.is_empty() && self.diag.is_empty()
    }

    pub fn max_abs(&self) -> S::Real {
        self.offdiag
            .iter()
            .map(|e| e.2.modulus())
            .chain(self.diag.iter().map(|e| e.1.modulus()))
            .fold(S::Real::zero(), |a, b| a.max(b))
    }

    /// All entries in both triangles as `(row, col, value)`.
    pub fn entries_symmetric(&self) -> Vec<(usize, usize, S)> {
        let mut out = Vec::with_capacity(2 * self.offdiag.len() + self.diag.len());
        for &(i, j, v) in &self.offdiag {
            out.push((i, j, v));
            out.push((j, i, v));
        }
        out.extend(self.diag.iter().map(|&(j, v)| (j, j, v)));
        out
    }

    pub fn to_matrix(&self) -> SymmetricMatrix<S> {
        let entries: Vec<(usize, usize, S)> =
            self.offdiag.iter().copied().chain(self.diag.iter().map(|&(j, v)| (j, j, v))).collect();
        SymmetricMatrix::from_triplets(self.n, &entries).expect("dropped entries are lower triangular and unique")
    }
}

/// Outcome of [`closedness_audit`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditReport {
    /// Reads of inverse entries that lie on the factor pattern.
    pub reads: u64,
    /// Reads of pairs `(i, k)` in the same column pattern that are missing
    /// from the factor pattern and were taken as zero.
    pub absent_reads: u64,
    /// Columns with at least one absent read.
    pub columns_with_absent_reads: Vec<usize>,
}

impl AuditReport {
    pub fn is_closed(&self) -> bool {
        self.absent_reads == 0
    }
}

/// Selected inversion on the exact fill pattern.
pub fn selinv_exact<S: Scalar>(f: &LdltFactors<S>) -> SelectedInverse<S> {
    let mut out = backward(f, false, None).0;
    out.exact = true;
    out
}

/// Selected inversion on the (possibly truncated) pattern of `f`.
///
/// With `track_dropped`, the updates that would land on entries of the
/// exact fill pattern missing from the truncated one are returned as `F`.
pub fn selinv_incomplete<S: Scalar>(
    f: &LdltFactors<S>,
    track_dropped: bool,
) -> (SelectedInverse<S>, Option<DroppedInverseEntries<S>>) {
    backward(f, track_dropped, None)
}

/// Runs selected inversion and counts reads of inverse entries that the
/// pattern does not provide.
pub fn closedness_audit<S: Scalar>(f: &LdltFactors<S>) -> AuditReport {
    let mut report = AuditReport { reads: 0, absent_reads: 0, columns_with_absent_reads: Vec::new() };
    backward(f, false, Some(&mut report));
    report.columns_with_absent_reads.sort_unstable();
    report
}

fn backward<S: Scalar>(
    f: &LdltFactors<S>,
    track: bool,
    mut audit: Option<&mut AuditReport>,
) -> (SelectedInverse<S>, Option<DroppedInverseEntries<S>>) {
    let n = f.n();
    let pat = f.pattern();
    let rows = pat.row_indices();
    let l = f.l_values();
    let d = f.d();
    let row_lists = if track { Some(pat.row_structure()) } else { None };
    let full = if track { Some(fill_closure(pat)) } else { None };
    let mut in_full = vec![usize::MAX; n];

    let mut b = vec![S::zero(); l.len()];
    let mut bdiag = vec![S::zero(); n];
    let mut flops = 0u64;

    let mut w = vec![S::zero(); n];
    let mut lj = vec![S::zero(); n];
    let mut mark = vec![usize::MAX; n];
    let mut fw = vec![S::zero(); n];
    let mut fmark = vec![usize::MAX; n];
    let mut ftouched: Vec<usize> = Vec::new();
    let mut f_cols: Vec<Vec<(usize, usize, S)>> = Vec::new();
    let mut f_diag: Vec<(usize, S)> = Vec::new();

    for j in (0..n).rev() {
        let r = pat.col_range(j);
        let r_rows = &rows[r.clone()];
        for (&i, &v) in r_rows.iter().zip(&l[r.clone()]) {
            mark[i] = j;
            lj[i] = v;
            w[i] = S::zero();
        }
        if let Some(full) = &full {
            for &i in full.col_rows(j) {
                in_full[i] = j;
            }
        }
        let mut hits = 0u64;

        for (&k, &lk) in r_rows.iter().zip(&l[r.clone()]) {
            w[k] += bdiag[k] * lk;
            flops += 1;
            for q in pat.col_range(k) {
                let i = rows[q];
                let bik = b[q];
                if mark[i] == j {
                    w[i] += bik * lk;
                    w[k] += bik * lj[i];
                    flops += 2;
                    hits += 1;
                } else if track && in_full[i] == j {
                    push_dropped(&mut fw, &mut fmark, &mut ftouched, j, i, bik * lk);
                }
            }
            if let Some(rl) = &row_lists {
                for (i, q) in rl.row(k) {
                    if i > j && mark[i] != j && in_full[i] == j {
                        push_dropped(&mut fw, &mut fmark, &mut ftouched, j, i, b[q] * lk);
                    }
                }
            }
        }

        if let Some(rep) = audit.as_deref_mut() {
            let m = r_rows.len() as u64;
            let pairs = m * m.saturating_sub(1) / 2;
            rep.reads += 2 * hits;
            if pairs > hits {
                rep.absent_reads += 2 * (pairs - hits);
                rep.columns_with_absent_reads.push(j);
            }
        }

        let mut s = S::one() / d[j];
        for p in r {
            let bij = -w[rows[p]];
            b[p] = bij;
            s -= bij * l[p];
            flops += 1;
        }
        bdiag[j] = s;

        if track {
            // F(j, j) = F(j, r~) L(r~, j); F(:, j) holds rows outside r~ only.
            let mut fjj = S::zero();
            for (&k, &lk) in r_rows.iter().zip(&l[pat.col_range(j)]) {
                if fmark[k] == j {
                    fjj += fw[k] * lk;
                }
            }
            if fjj != S::zero() {
                f_diag.push((j, fjj));
            }
            ftouched.sort_unstable();
            f_cols.push(ftouched.iter().map(|&i| (i, j, fw[i])).collect());
            ftouched.clear();
        }
    }

    let dropped = track.then(|| {
        f_diag.reverse();
        DroppedInverseEntries { n, offdiag: f_cols.into_iter().rev().flatten().collect(), diag: f_diag }
    });
    let inv = SelectedInverse {
        pattern: pat.clone(),
        values: b,
        diag: bdiag,
        exact: pat.cutoff().is_exact(),
        flops,
    };
    (inv, dropped)
}

#[inline]
fn push_dropped<S: Scalar>(fw: &mut [S], fmark: &mut [usize], touched: &mut Vec<usize>, j: usize, i: usize, v: S) {
    if fmark[i] != j {
        fmark[i] = j;
        fw[i] = S::zero();
        touched.push(i);
    }
    fw[i] += v;
}

/// Level between two vertices as seen by the a-posteriori bound: a stored
/// level, `cutoff + 1` for an absent entry of a truncated pattern, and
/// `None` (no coupling) for an absent entry of the exact pattern.
fn bound_level(levels: &FillPattern, i: usize, j: usize) -> Option<f64> {
    match levels.level(i, j) {
        Some(l) => Some(l as f64),
        None => match levels.cutoff() {
            Cutoff::Level(c) => Some(c as f64 + 1.0),
            Cutoff::Exact => None,
        },
    }
}

/// Entrywise a-posteriori bound on `|(A + E)^{-1} - B|` over the pattern of
/// the selected inverse `b`.
///
/// For `(i, j)` the bound is
/// `sum_q exp(-g level(q, j)) |F(i, q)| + sum_(p,q) exp(-g (level(i, p) + level(q, j))) |F(p, q)|`
/// with levels taken from `levels`, which must contain every off-diagonal
/// entry of `F`. The prefactor of the decay estimate is taken as 1.
pub fn aposteriori_selinv_bound<S: Scalar>(
    b: &SelectedInverse<S>,
    dropped: &DroppedInverseEntries<S>,
    levels: &FillPattern,
    g: f64,
) -> Result<SymmetricMatrix<f64>> {
    let n = b.n();
    if dropped.n() != n || levels.n() != n {
        return Err(Error::SizeMismatch { expected: n, found: if dropped.n() != n { dropped.n() } else { levels.n() } });
    }
    for &(i, j, _) in dropped.offdiag() {
        if !levels.contains(i, j) {
            return Err(Error::SupportNotCovered { row: i, col: j });
        }
    }
    let entries: Vec<(usize, usize, f64)> = dropped
        .entries_symmetric()
        .into_iter()
        .filter(|e| e.2 != S::zero())
        .map(|(i, j, v)| (i, j, v.modulus().as_f64()))
        .collect();

    // decay[v][x] = exp(-g level(x, v)) for every vertex v touched by F.
    let mut decay: Vec<Option<Vec<f64>>> = vec![None; n];
    for &(p, q, _) in &entries {
        for v in [p, q] {
            if decay[v].is_none() {
                decay[v] = Some((0..n).map(|x| bound_level(levels, x, v).map_or(0.0, |l| (-g * l).exp())).collect());
            }
        }
    }
    let mut by_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(p, q, m) in &entries {
        by_row[p].push((q, m));
    }

    let m = b.to_matrix();
    let values: Vec<f64> = m
        .iter()
        .map(|(i, j, _)| {
            let one = |i: usize, j: usize| -> f64 {
                let direct: f64 = by_row[i].iter().map(|&(q, v)| decay[q].as_ref().unwrap()[j] * v).sum();
                let two: f64 = entries
                    .iter()
                    .map(|&(p, q, v)| decay[p].as_ref().unwrap()[i] * decay[q].as_ref().unwrap()[j] * v)
                    .sum();
                direct + two
            };
            one(i, j).max(one(j, i))
        })
        .collect();
    Ok(SymmetricMatrix::from_sorted_columns(n, m.col_ptr().to_vec(), m.row_indices().to_vec(), values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorization::{ldlt_exact, ldlt_level};
    use crate::mesh::{toy_hamiltonian, MeshSpec};
    use crate::symbolic::fill_pattern_exact;
    use num_complex::Complex64 as C;

    #[test]
    fn diagonal_inverse() {
        let f = ldlt_exact(&SymmetricMatrix::from_diagonal(&[2.0, 4.0, -8.0])).unwrap();
        let b = selinv_exact(&f);
        assert_eq!(b.diagonal(), &[0.5, 0.25, -0.125]);
    }

    #[test]
    fn two_by_two_closed_form() {
        let a = SymmetricMatrix::from_triplets(2, &[(0, 0, 4.0), (1, 0, 2.0), (1, 1, 5.0)]).unwrap();
        let b = selinv_exact(&ldlt_exact(&a).unwrap());
        assert_eq!(b.get(0, 0), Some(5.0 / 16.0));
        assert_eq!(b.get(1, 1), Some(4.0 / 16.0));
        assert_eq!(b.get(1, 0), Some(-2.0 / 16.0));
        assert_eq!(b.get(0, 1), Some(-2.0 / 16.0));
    }

    #[test]
    fn embedded_incomplete_factors_invert_exactly() {
        let a = toy_hamiltonian::<C>(&MeshSpec::periodic(2, 6).unwrap()).unwrap().shift(C::new(0.98, 0.1));
        let f = ldlt_level(&a, 1, false).unwrap().0;
        let closed = fill_closure(f.pattern());
        let b = selinv_exact(&f.embed(&closed).unwrap());
        let inv = f.reconstruct().to_dense().inverse().unwrap();
        for (i, j, _) in closed.iter() {
            assert!((b.get(i, j).unwrap() - inv[(i, j)]).norm() < 1e-11);
        }
        assert!(f.embed(&fill_pattern_exact(&SymmetricMatrix::<C>::zeros(36))).is_err());
    }

    #[test]
    fn torus_matches_dense_inverse() {
        let a = toy_hamiltonian::<C>(&MeshSpec::periodic(2, 6).unwrap()).unwrap().shift(C::new(0.98, 0.05));
        let f = ldlt_exact(&a).unwrap();
        let b = selinv_exact(&f);
        let inv = a.to_dense().inverse().unwrap();
        let scale = inv.max_abs();
        for (i, j, v) in b.to_matrix().iter() {
            assert!((v - inv[(i, j)]).norm() < 1e-12 * scale, "({i},{j})");
        }
        assert!(closedness_audit(&f).is_closed());
    }

    #[test]
    fn exact_pattern_bit_matches() {
        let a = toy_hamiltonian::<C>(&MeshSpec::periodic(2, 6).unwrap()).unwrap().shift(C::new(0.3, 0.1));
        let f = ldlt_exact(&a).unwrap();
        let exact = selinv_exact(&f);
        let (inc, dropped) = selinv_incomplete(&f, true);
        assert_eq!(exact.values(), inc.values());
        assert_eq!(exact.diagonal(), inc.diagonal());
        assert!(dropped.unwrap().is_empty());
    }

    #[test]
    fn tridiagonal_level_zero_is_closed() {
        let mut e: Vec<_> = (0..10).map(|i| (i, i, 3.0)).collect();
        e.extend((1..10).map(|i| (i, i - 1, -1.0)));
        let a = SymmetricMatrix::from_triplets(10, &e).unwrap();
        let (f, _) = ldlt_level(&a, 0, false).unwrap();
        let rep = closedness_audit(&f);
        assert_eq!(rep.absent_reads, 0);
    }

    #[test]
    fn truncated_audit_is_deterministic() {
        let a = toy_hamiltonian::<C>(&MeshSpec::periodic(2, 8).unwrap()).unwrap().shift(C::new(0.98, 0.0));
        let (f, _) = ldlt_level(&a, 2, false).unwrap();
        let r1 = closedness_audit(&f);
        let r2 = closedness_audit(&f);
        assert_eq!(r1, r2);
        assert!(r1.absent_reads > 0);
    }

    #[test]
    fn dropped_entries_stay_off_the_pattern() {
        let a = toy_hamiltonian::<C>(&MeshSpec::periodic(1, 20).unwrap()).unwrap().shift(C::new(0.98, 0.0));
        let (f, _) = ldlt_level(&a, 3, false).unwrap();
        let (_, fd) = selinv_incomplete(&f, true);
        let fd = fd.unwrap();
        assert!(!fd.offdiag().is_empty());
        for &(i, j, _) in fd.offdiag() {
            assert!(i > j && !f.pattern().contains(i, j));
        }
        assert!(fd.diag().is_empty());
    }

    #[test]
    fn zero_dropped_gives_zero_bound() {
        let a = toy_hamiltonian::<C>(&MeshSpec::periodic(1, 12).unwrap()).unwrap().shift(C::new(0.5, 0.0));
        let f = ldlt_exact(&a).unwrap();
        let (b, fd) = selinv_incomplete(&f, true);
        let bound = aposteriori_selinv_bound(&b, &fd.unwrap(), f.pattern(), 0.4).unwrap();
        assert!(bound.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bound_needs_covering_levels() {
        let a = toy_hamiltonian::<C>(&MeshSpec::periodic(1, 20).unwrap()).unwrap().shift(C::new(0.98, 0.0));
        let (f, _) = ldlt_level(&a, 3, false).unwrap();
        let (b, fd) = selinv_incomplete(&f, true);
        let fd = fd.unwrap();
        assert!(matches!(
            aposteriori_selinv_bound(&b, &fd, f.pattern(), 0.2),
            Err(Error::SupportNotCovered { .. })
        ));
        let bound = aposteriori_selinv_bound(&b, &fd, &fill_pattern_exact(&a), 0.2).unwrap();
        assert!(bound.values().iter().any(|&v| v > 0.0));
    }
}
