//! Symbolic factorization: levels of fill and truncated fill patterns.
//!
//! A fill path between `i` and `j` is a graph path whose interior vertices
//! are all numbered below `min(i, j)`; `(i, j)` fills in exactly when such a
//! path exists. The level of fill is the shortest fill-path length minus one
//! (zero for original entries), and the incomplete pattern keeps the entries
//! whose level does not exceed the cutoff.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::sparse::SymmetricMatrix;

/// Level-of-fill cutoff of a pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cutoff {
    /// Keep entries with level at most `c`.
    Level(u16),
    /// Keep every fill entry.
    Exact,
}

impl Cutoff {
    #[inline]
    pub fn admits(self, level: u32) -> bool {
        match self {
            Cutoff::Level(c) => level <= c as u32,
            Cutoff::Exact => true,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Cutoff::Exact)
    }

    /// `2c + 1`, the largest level a dropped update can reach.
    pub fn doubled(self) -> Cutoff {
        match self {
            Cutoff::Level(c) => Cutoff::Level((2 * c as u32 + 1).min(u16::MAX as u32 - 1) as u16),
            Cutoff::Exact => Cutoff::Exact,
        }
    }
}

impl fmt::Display for Cutoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cutoff::Level(c) => write!(f, "{c}"),
            Cutoff::Exact => f.write_str("exact"),
        }
    }
}

/// Strictly lower-triangular sparsity pattern with per-entry levels of fill.
///
/// Column `j` lists the rows `i > j` of the pattern in increasing order.
/// Levels saturate at `u16::MAX`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FillPattern {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    levels: Vec<u16>,
    cutoff: Cutoff,
}

/// Row-wise view of a [`FillPattern`]: for each row `i`, the columns `k < i`
/// with `(i, k)` in the pattern and the position of that entry.
#[derive(Clone, Debug)]
pub struct RowStructure {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    pos: Vec<usize>,
}

impl RowStructure {
    /// `(column, position)` pairs of row `i`, columns increasing.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.pos[r].iter().copied())
    }
}

impl FillPattern {
    pub(crate) fn from_parts(n: usize, col_ptr: Vec<usize>, row_idx: Vec<usize>, levels: Vec<u16>, cutoff: Cutoff) -> Self {
        debug_assert_eq!(col_ptr.len(), n + 1);
        debug_assert_eq!(row_idx.len(), levels.len());
        Self { n, col_ptr, row_idx, levels, cutoff }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    pub fn cutoff(&self) -> Cutoff {
        self.cutoff
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_indices(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn levels(&self) -> &[u16] {
        &self.levels
    }

    pub fn col_range(&self, j: usize) -> std::ops::Range<usize> {
        self.col_ptr[j]..self.col_ptr[j + 1]
    }

    pub fn col_rows(&self, j: usize) -> &[usize] {
        &self.row_idx[self.col_range(j)]
    }

    pub fn col_levels(&self, j: usize) -> &[u16] {
        &self.levels[self.col_range(j)]
    }

    /// Position of `(i, j)`, `i > j`, in the entry arrays.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let r = self.col_range(j);
        self.row_idx[r.clone()].binary_search(&i).ok().map(|p| r.start + p)
    }

    /// Level of `(i, j)` in either triangle; the diagonal has level 0 and
    /// entries outside the pattern give `None`.
    pub fn level(&self, i: usize, j: usize) -> Option<u16> {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        if r == c {
            return Some(0);
        }
        self.position(r, c).map(|p| self.levels[p])
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.level(i, j).is_some()
    }

    /// All entries as `(row, col, level)` with `row > col`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, u16)> + '_ {
        (0..self.n).flat_map(move |j| {
            self.col_rows(j).iter().zip(self.col_levels(j)).map(move |(&i, &l)| (i, j, l))
        })
    }

    pub fn max_level(&self) -> u16 {
        self.levels.iter().copied().max().unwrap_or(0)
    }

    pub fn row_structure(&self) -> RowStructure {
        let mut counts = vec![0usize; self.n + 1];
        for &i in &self.row_idx {
            counts[i + 1] += 1;
        }
        for i in 0..self.n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0; self.nnz()];
        let mut pos = vec![0; self.nnz()];
        for j in 0..self.n {
            for p in self.col_range(j) {
                let i = self.row_idx[p];
                cols[next[i]] = j;
                pos[next[i]] = p;
                next[i] += 1;
            }
        }
        RowStructure { row_ptr: counts, cols, pos }
    }

    /// Entries of `self` restricted to levels admitted by `cutoff`.
    pub fn truncate(&self, cutoff: Cutoff) -> FillPattern {
        let mut col_ptr = Vec::with_capacity(self.n + 1);
        let mut row_idx = Vec::new();
        let mut levels = Vec::new();
        col_ptr.push(0);
        for j in 0..self.n {
            for (&i, &l) in self.col_rows(j).iter().zip(self.col_levels(j)) {
                if cutoff.admits(l as u32) {
                    row_idx.push(i);
                    levels.push(l);
                }
            }
            col_ptr.push(row_idx.len());
        }
        FillPattern { n: self.n, col_ptr, row_idx, levels, cutoff }
    }
}

/// Computes the level-of-fill pattern of `a` truncated at `cutoff`.
///
/// Left-looking over columns with a scatter workspace: for each column `k < j`
/// whose pattern contains row `j`, every row `i > j` of column `k` is a
/// candidate with level `lev(i,k) + lev(j,k) + 1`. Only entries already kept
/// propagate, which is the usual ILU(k) rule.
pub fn symbolic_levels<S: Scalar>(a: &SymmetricMatrix<S>, cutoff: Cutoff) -> FillPattern {
    let n = a.n();
    let mut col_ptr = Vec::with_capacity(n + 1);
    let mut row_idx: Vec<usize> = Vec::with_capacity(2 * a.nnz());
    let mut levels: Vec<u16> = Vec::with_capacity(2 * a.nnz());
    // rows[j]: (column k, position of (j, k)) for finished columns k < j.
    let mut rows: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut lev = vec![u32::MAX; n];
    let mut touched: Vec<usize> = Vec::new();
    col_ptr.push(0);

    for j in 0..n {
        for &i in a.col_rows(j) {
            if i > j {
                lev[i] = 0;
                touched.push(i);
            }
        }
        for &(k, p) in &rows[j] {
            let lj = levels[p] as u32;
            for q in p + 1..col_ptr[k + 1] {
                let i = row_idx[q];
                let cand = levels[q] as u32 + lj + 1;
                if cutoff.admits(cand) && cand < lev[i] {
                    if lev[i] == u32::MAX {
                        touched.push(i);
                    }
                    lev[i] = cand;
                }
            }
        }
        touched.sort_unstable();
        for &i in &touched {
            rows[i].push((j, row_idx.len()));
            row_idx.push(i);
            levels.push(lev[i].min(u16::MAX as u32) as u16);
            lev[i] = u32::MAX;
        }
        touched.clear();
        col_ptr.push(row_idx.len());
    }
    FillPattern { n, col_ptr, row_idx, levels, cutoff }
}

/// Structural pattern of the exact factor (no truncation).
pub fn fill_pattern_exact<S: Scalar>(a: &SymmetricMatrix<S>) -> FillPattern {
    symbolic_levels(a, Cutoff::Exact)
}

/// Exact fill pattern of the graph of `p`.
///
/// Any pattern between the matrix graph and its exact fill has the same
/// exact fill, so this recovers the full pattern from a truncated one.
pub fn fill_closure(p: &FillPattern) -> FillPattern {
    let n = p.n;
    let mut col_ptr = Vec::with_capacity(n + 1);
    let mut rows = Vec::with_capacity(n + p.nnz());
    col_ptr.push(0);
    for j in 0..n {
        rows.push(j);
        rows.extend_from_slice(p.col_rows(j));
        col_ptr.push(rows.len());
    }
    let ones = vec![1.0f64; rows.len()];
    fill_pattern_exact(&SymmetricMatrix::from_sorted_columns(n, col_ptr, rows, ones))
}

/// Level of fill of `(i, j)` by direct search for the shortest fill path.
///
/// Breadth-first search from `i` that may only pass through vertices below
/// `min(i, j)`. Returns `None` when no fill path exists. Intended as an
/// independent check on [`symbolic_levels`] for small graphs.
pub fn fill_path_oracle<S: Scalar>(a: &SymmetricMatrix<S>, i: usize, j: usize) -> Option<usize> {
    if i == j {
        return Some(0);
    }
    let adj = a.adjacency();
    let floor = i.min(j);
    let mut dist = vec![usize::MAX; a.n()];
    let mut queue = VecDeque::new();
    dist[i] = 0;
    queue.push_back(i);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if w == j {
                return Some(dist[v]);
            }
            if w < floor && dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    None
}
