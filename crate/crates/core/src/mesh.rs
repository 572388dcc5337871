//! Cartesian meshes and the chequerboard tight-binding model on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::SymmetricMatrix;

/// A `dim`-dimensional Cartesian mesh with `m` vertices per axis.
///
/// Vertices are numbered lexicographically with the first coordinate most
/// significant: `index = sum_a coord[a] * m^(dim-1-a)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshSpec {
    pub dim: usize,
    pub m: usize,
    pub periodic: bool,
}

impl MeshSpec {
    pub fn new(dim: usize, m: usize, periodic: bool) -> Result<Self> {
        let spec = Self { dim, m, periodic };
        spec.validate()?;
        Ok(spec)
    }

    /// Periodic mesh, the setting of the chequerboard model.
    pub fn periodic(dim: usize, m: usize) -> Result<Self> {
        Self::new(dim, m, true)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::InvalidMesh(format!("dimension must be 1, 2 or 3, got {}", self.dim)));
        }
        if self.m < 2 {
            return Err(Error::InvalidMesh(format!("side length must be at least 2, got {}", self.m)));
        }
        Ok(())
    }

    pub fn num_vertices(&self) -> usize {
        self.m.pow(self.dim as u32)
    }

    pub fn coords(&self, mut index: usize) -> Vec<usize> {
        let mut c = vec![0; self.dim];
        for a in (0..self.dim).rev() {
            c[a] = index % self.m;
            index /= self.m;
        }
        c
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().fold(0, |acc, &x| acc * self.m + x)
    }

    /// Nearest neighbours of a vertex, deduplicated and sorted.
    ///
    /// On a periodic mesh with `m = 2` the two wrap-around neighbours along an
    /// axis coincide and are reported once.
    pub fn neighbors(&self, index: usize) -> Vec<usize> {
        let c = self.coords(index);
        let mut out = Vec::with_capacity(2 * self.dim);
        let mut nb = c.clone();
        for a in 0..self.dim {
            let x = c[a];
            let mut push = |y: usize, nb: &mut Vec<usize>| {
                nb[a] = y;
                out.push(self.index(nb));
                nb[a] = x;
            };
            if x + 1 < self.m {
                push(x + 1, &mut nb);
            } else if self.periodic {
                push(0, &mut nb);
            }
            if x > 0 {
                push(x - 1, &mut nb);
            } else if self.periodic {
                push(self.m - 1, &mut nb);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// The chequerboard model Hamiltonian on `spec`.
///
/// Diagonal entries are `(-1)^(x_1 + ... + x_d)`, i.e. the sign alternates
/// between neighbours, and every nearest-neighbour link carries `-1/(2d)`.
/// Periodic meshes need an even side length for the chequerboard to close
/// across the seam.
pub fn toy_hamiltonian<S: Scalar>(spec: &MeshSpec) -> Result<SymmetricMatrix<S>> {
    spec.validate()?;
    if spec.periodic && !spec.m.is_multiple_of(2) {
        return Err(Error::InvalidMesh(format!(
            "periodic chequerboard needs an even side length, got {}",
            spec.m
        )));
    }
    let n = spec.num_vertices();
    let hop = S::from_f64(-1.0 / (2.0 * spec.dim as f64));
    let mut entries = Vec::with_capacity(n * (spec.dim + 1));
    for v in 0..n {
        let parity = spec.coords(v).iter().sum::<usize>() % 2;
        let diag = if parity == 0 { S::one() } else { -S::one() };
        entries.push((v, v, diag));
        for w in spec.neighbors(v) {
            if w < v {
                entries.push((v, w, hop));
            }
        }
    }
    SymmetricMatrix::from_triplets(n, &entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::eigendecomposition;

    #[test]
    fn one_dimensional_chain() {
        let h = toy_hamiltonian::<f64>(&MeshSpec::periodic(1, 6).unwrap()).unwrap();
        assert_eq!(h.diagonal(), vec![1.0, -1.0, 1.0, -1.0, 1.0, -1.0]);
        for i in 0..5 {
            assert_eq!(h.get(i + 1, i), -0.5);
        }
        assert_eq!(h.get(5, 0), -0.5);
        assert_eq!(h.get(3, 0), 0.0);
        assert_eq!(h.nnz(), 12);
    }

    #[test]
    fn two_by_two_torus_collapses_double_links() {
        // On the 2x2 torus the +1 and -1 neighbours coincide along each axis,
        // so every vertex has two distinct neighbours and four links counted
        // with multiplicity; values stay at -1/4.
        let spec = MeshSpec::periodic(2, 2).unwrap();
        let h = toy_hamiltonian::<f64>(&spec).unwrap();
        for v in 0..4 {
            let nb = spec.neighbors(v);
            assert_eq!(nb.len(), 2);
            for &w in &nb {
                assert_eq!(h.get(v, w), -0.25);
            }
        }
        // (0,0) ~ (0,1), (1,0); never the diagonal (1,1).
        assert_eq!(spec.neighbors(0), vec![1, 2]);
        assert_eq!(h.get(0, 3), 0.0);
        assert_eq!(h.diagonal(), vec![1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn rejects_odd_periodic_side() {
        assert!(matches!(
            toy_hamiltonian::<f64>(&MeshSpec::periodic(2, 5).unwrap()),
            Err(Error::InvalidMesh(_))
        ));
        assert!(MeshSpec::periodic(4, 4).is_err());
        assert!(MeshSpec::periodic(2, 1).is_err());
    }

    #[test]
    fn off_diagonal_row_sums() {
        for (dim, m) in [(1, 8), (2, 6), (3, 4)] {
            let h = toy_hamiltonian::<f64>(&MeshSpec::periodic(dim, m).unwrap()).unwrap();
            let ones = vec![1.0; h.n()];
            let rows = h.matvec(&ones);
            for (i, (r, d)) in rows.iter().zip(h.diagonal()).enumerate() {
                assert!((r - d + 1.0).abs() < 1e-15, "row {i}");
            }
        }
    }

    #[test]
    fn spectrum_in_two_bands() {
        let h = toy_hamiltonian::<f64>(&MeshSpec::periodic(1, 100).unwrap()).unwrap();
        let e = eigendecomposition(&h.to_dense()).unwrap();
        let s2 = 2f64.sqrt();
        for &x in &e.values {
            let a = x.abs();
            assert!(a >= 1.0 - 1e-10 && a <= s2 + 1e-10, "{x}");
        }
    }
}
