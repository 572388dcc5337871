//! Fill-reducing vertex orderings.
//!
//! Nested dissection numbers two disconnected halves `V1`, `V2` first and the
//! separator `Vsep` between them last, recursively. With that order no fill
//! path can join `V1` and `V2`, so the `(V2, V1)` block of the factor stays
//! empty.

use crate::error::{Error, Result};
use crate::mesh::MeshSpec;
use crate::scalar::Scalar;
use crate::sparse::SymmetricMatrix;

/// Cartesian blocks whose sides are all at most this long are numbered
/// lexicographically instead of being dissected further.
pub const CARTESIAN_BASE_SIDE: usize = 3;

/// Connected pieces of at most this many vertices are not dissected further.
pub const GENERAL_BASE_SIZE: usize = 3;

/// A bijection of `0..n`; `forward[old] = new`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self { forward: (0..n).collect(), inverse: (0..n).collect() }
    }

    /// From the `old -> new` map.
    pub fn from_forward(forward: Vec<usize>) -> Result<Self> {
        let n = forward.len();
        let mut inverse = vec![usize::MAX; n];
        for (old, &new) in forward.iter().enumerate() {
            if new >= n || inverse[new] != usize::MAX {
                return Err(Error::Config(format!("not a permutation: target {} repeated or out of range", new + 1)));
            }
            inverse[new] = old;
        }
        Ok(Self { forward, inverse })
    }

    /// From the elimination sequence: `order[k]` is the old index numbered `k`.
    pub fn from_order(order: Vec<usize>) -> Result<Self> {
        let p = Self::from_forward(order)?;
        Ok(p.inverted())
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// New position of old index `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.forward[i]
    }

    /// Old index at new position `k`.
    pub fn apply_inverse(&self, k: usize) -> usize {
        self.inverse[k]
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    pub fn inverted(&self) -> Self {
        Self { forward: self.inverse.clone(), inverse: self.forward.clone() }
    }
}

/// Returns `P A P^T`, i.e. the matrix with `B(p(i), p(j)) = A(i, j)`.
pub fn permute<S: Scalar>(a: &SymmetricMatrix<S>, p: &Permutation) -> Result<SymmetricMatrix<S>> {
    if p.len() != a.n() {
        return Err(Error::SizeMismatch { expected: a.n(), found: p.len() });
    }
    let entries: Vec<_> = a.iter().map(|(i, j, v)| (p.apply(i), p.apply(j), v)).collect();
    SymmetricMatrix::from_triplets(a.n(), &entries)
}

/// Axis-aligned box of mesh vertices. `ring[a]` marks an axis that still
/// wraps around (full periodic extent, not yet cut).
#[derive(Clone, Debug)]
struct Block {
    lo: Vec<usize>,
    hi: Vec<usize>,
    ring: Vec<bool>,
}

impl Block {
    fn side(&self, a: usize) -> usize {
        self.hi[a] - self.lo[a]
    }

    fn is_empty(&self) -> bool {
        (0..self.lo.len()).any(|a| self.side(a) == 0)
    }

    fn with_range(&self, axis: usize, lo: usize, hi: usize) -> Self {
        let mut b = self.clone();
        b.lo[axis] = lo;
        b.hi[axis] = hi;
        b.ring[axis] = false;
        b
    }

    fn push_lexicographic(&self, spec: &MeshSpec, keep: impl Fn(&[usize]) -> bool, out: &mut Vec<usize>) {
        if self.is_empty() {
            return;
        }
        let dim = self.lo.len();
        let mut c = self.lo.clone();
        loop {
            if keep(&c) {
                out.push(spec.index(&c));
            }
            let mut a = dim;
            loop {
                if a == 0 {
                    return;
                }
                a -= 1;
                c[a] += 1;
                if c[a] < self.hi[a] {
                    break;
                }
                c[a] = self.lo[a];
            }
        }
    }
}

/// One recursion step of nested dissection, as ranges of new positions:
/// `v1 = start..v2_start`, `v2 = v2_start..sep_start`, `sep = sep_start..end`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Split {
    pub start: usize,
    pub v2_start: usize,
    pub sep_start: usize,
    pub end: usize,
}

/// Nested dissection of a 2D or 3D Cartesian mesh.
///
/// Each separator is a one-vertex-thick plane perpendicular to the longest
/// side of the current block (ties go to the last axis), placed at offset
/// `side / 2` so the lower half gets the extra vertex. An axis that still
/// wraps around is cut by two planes at once, one at the seam and one in the
/// middle, since a single plane cannot disconnect a ring.
pub fn nested_dissection_cartesian(spec: &MeshSpec) -> Result<Permutation> {
    nested_dissection_cartesian_with_splits(spec).map(|(p, _)| p)
}

/// [`nested_dissection_cartesian`] plus the recorded dissection steps.
pub fn nested_dissection_cartesian_with_splits(spec: &MeshSpec) -> Result<(Permutation, Vec<Split>)> {
    spec.validate()?;
    if spec.dim == 1 {
        return Err(Error::InvalidMesh("nested dissection needs dimension 2 or 3; use the natural order in 1D".into()));
    }
    let root = Block { lo: vec![0; spec.dim], hi: vec![spec.m; spec.dim], ring: vec![spec.periodic; spec.dim] };
    let mut order = Vec::with_capacity(spec.num_vertices());
    let mut splits = Vec::new();
    dissect_block(spec, &root, &mut order, &mut splits);
    debug_assert_eq!(order.len(), spec.num_vertices());
    Ok((Permutation::from_order(order)?, splits))
}

fn dissect_block(spec: &MeshSpec, block: &Block, out: &mut Vec<usize>, splits: &mut Vec<Split>) {
    if block.is_empty() {
        return;
    }
    let dim = spec.dim;
    let mut axis = 0;
    for a in 1..dim {
        if block.side(a) >= block.side(axis) {
            axis = a;
        }
    }
    if block.side(axis) <= CARTESIAN_BASE_SIDE {
        block.push_lexicographic(spec, |_| true, out);
        return;
    }
    let (lo, hi) = (block.lo[axis], block.hi[axis]);
    let mid = lo + (hi - lo) / 2;
    let start = out.len();
    let (v2_start, sep_start);
    if block.ring[axis] {
        // Planes at the seam (lo) and at mid.
        dissect_block(spec, &block.with_range(axis, lo + 1, mid), out, splits);
        v2_start = out.len();
        dissect_block(spec, &block.with_range(axis, mid + 1, hi), out, splits);
        sep_start = out.len();
        let mut sep = block.clone();
        sep.ring[axis] = false;
        sep.push_lexicographic(spec, |c| c[axis] == lo || c[axis] == mid, out);
    } else {
        dissect_block(spec, &block.with_range(axis, lo, mid), out, splits);
        v2_start = out.len();
        dissect_block(spec, &block.with_range(axis, mid + 1, hi), out, splits);
        sep_start = out.len();
        block.with_range(axis, mid, mid + 1).push_lexicographic(spec, |_| true, out);
    }
    splits.push(Split { start, v2_start, sep_start, end: out.len() });
}

/// Nested dissection of an arbitrary matrix graph.
///
/// Separators are BFS level sets rooted at a pseudo-peripheral vertex; the
/// level that best balances the vertices before and after it is chosen.
/// Connected components are ordered one after another.
pub fn nested_dissection_general<S: Scalar>(a: &SymmetricMatrix<S>) -> Permutation {
    nested_dissection_general_with_splits(a).0
}

/// [`nested_dissection_general`] plus the recorded dissection steps.
pub fn nested_dissection_general_with_splits<S: Scalar>(a: &SymmetricMatrix<S>) -> (Permutation, Vec<Split>) {
    let adj = a.adjacency();
    let n = a.n();
    let mut order = Vec::with_capacity(n);
    let mut in_set = vec![false; n];
    let all: Vec<usize> = (0..n).collect();
    let mut scratch = Scratch { level: vec![usize::MAX; n] };
    let mut splits = Vec::new();
    dissect_graph(&adj, all, &mut in_set, &mut scratch, &mut order, &mut splits);
    (Permutation::from_order(order).expect("dissection visits every vertex once"), splits)
}

struct Scratch {
    level: Vec<usize>,
}

fn dissect_graph(
    adj: &[Vec<usize>],
    set: Vec<usize>,
    in_set: &mut [bool],
    scratch: &mut Scratch,
    out: &mut Vec<usize>,
    splits: &mut Vec<Split>,
) {
    if set.is_empty() {
        return;
    }
    for &v in &set {
        in_set[v] = true;
    }
    let components = components(adj, &set, in_set, scratch);
    for &v in &set {
        in_set[v] = false;
    }
    if components.len() > 1 {
        for comp in components {
            dissect_graph(adj, comp, in_set, scratch, out, splits);
        }
        return;
    }
    let mut comp = components.into_iter().next().unwrap();
    if comp.len() <= GENERAL_BASE_SIZE {
        comp.sort_unstable();
        out.extend(comp);
        return;
    }

    for &v in &comp {
        in_set[v] = true;
    }
    let root = pseudo_peripheral(adj, &comp, in_set, scratch);
    let levels = level_sets(adj, root, in_set, scratch);
    for &v in &comp {
        in_set[v] = false;
    }

    let k = if levels.len() <= 2 {
        1.min(levels.len() - 1)
    } else {
        let total = comp.len();
        let mut before = 0;
        let mut best = (usize::MAX, 1);
        for (k, lev) in levels.iter().enumerate() {
            if k > 0 && k + 1 < levels.len() {
                let after = total - before - lev.len();
                let score = before.max(after);
                if score < best.0 {
                    best = (score, k);
                }
            }
            before += lev.len();
        }
        best.1
    };
    let v1: Vec<usize> = levels[..k].concat();
    let v2: Vec<usize> = levels[k + 1..].concat();
    let mut sep = levels[k].clone();
    let start = out.len();
    dissect_graph(adj, v1, in_set, scratch, out, splits);
    let v2_start = out.len();
    dissect_graph(adj, v2, in_set, scratch, out, splits);
    let sep_start = out.len();
    sep.sort_unstable();
    out.extend(sep);
    splits.push(Split { start, v2_start, sep_start, end: out.len() });
}

fn components(adj: &[Vec<usize>], set: &[usize], in_set: &[bool], scratch: &mut Scratch) -> Vec<Vec<usize>> {
    let mut comps = Vec::new();
    for &s in set {
        if scratch.level[s] != usize::MAX {
            continue;
        }
        let mut comp = vec![s];
        scratch.level[s] = 0;
        let mut head = 0;
        while head < comp.len() {
            let v = comp[head];
            head += 1;
            for &w in &adj[v] {
                if in_set[w] && scratch.level[w] == usize::MAX {
                    scratch.level[w] = 0;
                    comp.push(w);
                }
            }
        }
        comps.push(comp);
    }
    for &v in set {
        scratch.level[v] = usize::MAX;
    }
    comps
}

/// BFS level sets from `root` restricted to `in_set`.
fn level_sets(adj: &[Vec<usize>], root: usize, in_set: &[bool], scratch: &mut Scratch) -> Vec<Vec<usize>> {
    let mut levels = vec![vec![root]];
    scratch.level[root] = 0;
    loop {
        let d = levels.len();
        let mut next = Vec::new();
        for &v in levels.last().unwrap() {
            for &w in &adj[v] {
                if in_set[w] && scratch.level[w] == usize::MAX {
                    scratch.level[w] = d;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        levels.push(next);
    }
    for lev in &levels {
        for &v in lev {
            scratch.level[v] = usize::MAX;
        }
    }
    levels
}

/// George-Liu pseudo-peripheral vertex search.
fn pseudo_peripheral(adj: &[Vec<usize>], comp: &[usize], in_set: &[bool], scratch: &mut Scratch) -> usize {
    let degree = |v: usize| adj[v].iter().filter(|&&w| in_set[w]).count();
    let mut root = *comp.iter().min().unwrap();
    let mut ecc = level_sets(adj, root, in_set, scratch).len();
    loop {
        let levels = level_sets(adj, root, in_set, scratch);
        let cand = *levels.last().unwrap().iter().min_by_key(|&&v| (degree(v), v)).unwrap();
        let cand_ecc = level_sets(adj, cand, in_set, scratch).len();
        if cand_ecc > ecc {
            root = cand;
            ecc = cand_ecc;
        } else {
            return root;
        }
    }
}
