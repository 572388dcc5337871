//! Exact and incomplete selected inversion of sparse complex-symmetric
//! matrices.
//!
//! The pipeline orders a matrix (nested dissection), computes the fill
//! pattern with levels of fill, factorizes `A = L D L^T` exactly or
//! incompletely on a truncated pattern, and runs selected inversion to get
//! the entries of `A^{-1}` on that pattern. Incomplete runs can report the
//! dropped entries `E` and `F` of both stages. The [`localization`] module
//! computes the Green's-function decay rates that predict how the truncation
//! error shrinks with the cutoff, and [`pexsi`] sums selected inverses over a
//! pole expansion.
//!
//! Numerical kernels are generic over [`Scalar`] (`f64` and `Complex<f64>`);
//! the aliases below fix the complex case.

pub mod dense;
pub mod error;
pub mod factorization;
pub mod io;
pub mod localization;
pub mod mesh;
pub mod ordering;
pub mod pexsi;
pub mod quadrature;
pub mod scalar;
pub mod selinv;
pub mod sparse;
pub mod study;
pub mod symbolic;

pub use dense::{dense_inverse, eigendecomposition, DenseMatrix, ORACLE_CAP};
pub use error::{Error, Result};
pub use factorization::{
    aposteriori_inverse_bound, ldlt_exact, ldlt_incomplete, ldlt_incomplete_tol, ldlt_level, DroppedEntries,
    LdltFactors,
};
pub use localization::{fit_decay_rate, green_single_interval, green_two_intervals, SpectralSet};
pub use mesh::{toy_hamiltonian, MeshSpec};
pub use ordering::{nested_dissection_cartesian, nested_dissection_general, permute, Permutation};
pub use pexsi::{pexsi_evaluate, Pole, PoleExpansion};
pub use scalar::{Real, Scalar};
pub use selinv::{closedness_audit, selinv_exact, selinv_incomplete, DroppedInverseEntries, SelectedInverse};
pub use sparse::SymmetricMatrix;
pub use study::{run_study, StudyConfig, StudyKind};
pub use symbolic::{fill_path_oracle, fill_pattern_exact, symbolic_levels, Cutoff, FillPattern};

pub use num_complex::Complex64;

#[allow(non_camel_case_types)]
pub type c64 = Complex64;

pub type SparseSymmetric = SymmetricMatrix<c64>;
pub type Factors = LdltFactors<c64>;
pub type Inverse = SelectedInverse<c64>;
