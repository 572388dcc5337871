//! Pole-expansion driver: selected entries of `r(H) = sum_k w_k (H - z_k I)^{-1}`.
//!
//! The fill pattern depends only on the structure of `H`, so it is computed
//! once and shared. Each pole is then factorized and selectively inverted
//! independently (in parallel), and the weighted contributions are summed in
//! pole order so results do not depend on scheduling.

use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::Serialize;

use crate::dense::{eigendecomposition, DenseMatrix};
use crate::error::{Error, Result};
use crate::factorization::ldlt_incomplete;
use crate::ordering::{permute, Permutation};
use crate::selinv::selinv_incomplete;
use crate::sparse::SymmetricMatrix;
use crate::symbolic::{symbolic_levels, Cutoff};

/// Exponent magnitude beyond which the Fermi-Dirac function saturates.
const EXP_CLAMP: f64 = 700.0;

/// One term `w / (x - z)` of a pole expansion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pole {
    pub weight: C,
    pub z: C,
}

/// Rational function `r(x) = sum_k w_k / (x - z_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PoleExpansion {
    poles: Vec<Pole>,
}

impl PoleExpansion {
    pub fn new(poles: Vec<Pole>) -> Result<Self> {
        if poles.is_empty() {
            return Err(Error::InvalidPoles("at least one pole is required".into()));
        }
        for (k, p) in poles.iter().enumerate() {
            let finite = [p.weight.re, p.weight.im, p.z.re, p.z.im].iter().all(|v| v.is_finite());
            if !finite {
                return Err(Error::InvalidPoles(format!("pole {} is not finite", k + 1)));
            }
        }
        Ok(Self { poles })
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    /// `r(x)` for a scalar argument.
    pub fn evaluate(&self, x: C) -> C {
        self.poles.iter().map(|p| p.weight / (x - p.z)).sum()
    }

    /// Poles of `self` followed by those of `other`.
    pub fn union(&self, other: &Self) -> Self {
        Self { poles: self.poles.iter().chain(&other.poles).copied().collect() }
    }

    /// Whether every pole has a partner with conjugate pole and weight.
    pub fn is_conjugate_closed(&self, tol: f64) -> bool {
        self.poles.iter().all(|p| {
            self.poles.iter().any(|q| (q.z - p.z.conj()).norm() <= tol && (q.weight - p.weight.conj()).norm() <= tol)
        })
    }
}

/// `1 / (1 + exp(beta (e - ef)))` with the exponent clamped against overflow.
pub fn fermi_dirac(e: f64, beta: f64, ef: f64) -> f64 {
    let x = (beta * (e - ef)).clamp(-EXP_CLAMP, EXP_CLAMP);
    1.0 / (1.0 + x.exp())
}

/// Fermi-Dirac function continued to complex arguments.
pub fn fermi_dirac_complex(e: C, beta: f64, ef: f64) -> C {
    let x = (e - ef) * beta;
    let x = C::new(x.re.clamp(-EXP_CLAMP, EXP_CLAMP), x.im);
    1.0 / (1.0 + x.exp())
}

/// Trapezoid discretization of the Cauchy integral of `f` over a circle.
///
/// Poles `z_k = center + radius e^{i theta_k}`, `theta_k = 2 pi (k + 1/2) / q`,
/// with weights `w_k = -f(z_k) (z_k - center) / q`, so that
/// `sum_k w_k / (x - z_k) -> f(x)` geometrically in `q` for `x` inside the
/// circle. The half-step offset keeps poles off the real axis, and a real
/// center with `f` real on the real line gives conjugate pairs.
pub fn circle_contour_poles(q: usize, center: C, radius: f64, f: impl Fn(C) -> C) -> Result<PoleExpansion> {
    if q < 4 {
        return Err(Error::InvalidPoles(format!("a circle contour needs at least 4 poles, got {q}")));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidPoles(format!("radius must be positive, got {radius}")));
    }
    let poles = (0..q)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / q as f64;
            let offset = C::from_polar(radius, theta);
            let z = center + offset;
            Pole { weight: -f(z) * offset / q as f64, z }
        })
        .collect();
    PoleExpansion::new(poles)
}

/// Diagnostics of one pole's factorization and inversion.
#[derive(Clone, Debug, Serialize)]
pub struct PoleDiagnostics {
    pub index: usize,
    pub z: [f64; 2],
    pub weight: [f64; 2],
    pub cutoff: String,
    pub nnz_l: usize,
    pub flops: u64,
    /// Largest dropped factor entry, when dropped entries were tracked.
    pub dropped_max: Option<f64>,
    /// Largest dropped inverse entry, when dropped entries were tracked.
    pub dropped_inverse_max: Option<f64>,
}

/// Quantities assembled from the pole expansion.
#[derive(Clone, Debug, Serialize)]
pub struct QuantityReport {
    /// Real parts of the diagonal of `r(H)`.
    pub rho: Vec<f64>,
    /// Largest imaginary part on the diagonal.
    pub max_imag: f64,
    /// `trace r(H)`, real part.
    pub electrons: f64,
    /// Trace of the energy expansion, when one was supplied.
    pub energy: Option<f64>,
    pub poles: Vec<PoleDiagnostics>,
}

/// Output of [`pexsi_evaluate`].
#[derive(Clone, Debug)]
pub struct PexsiResult {
    /// Entries of `r(H)` on the pattern of `H` and the diagonal, in the
    /// original numbering.
    pub entries: SymmetricMatrix<C>,
    /// Diagonal of `r(H)`, original numbering.
    pub diagonal: Vec<C>,
    pub report: QuantityReport,
}

/// Settings of [`pexsi_evaluate`].
#[derive(Clone, Debug)]
pub struct PexsiOptions<'a> {
    pub cutoff: Cutoff,
    /// Fill-reducing order applied before factorization.
    pub order: Option<&'a Permutation>,
    /// Second pole set whose trace is reported as the energy.
    pub energy_poles: Option<&'a PoleExpansion>,
    pub track_dropped: bool,
}

impl Default for PexsiOptions<'_> {
    fn default() -> Self {
        Self { cutoff: Cutoff::Exact, order: None, energy_poles: None, track_dropped: false }
    }
}

struct PoleRun {
    values: Vec<C>,
    diag: PoleDiagnostics,
}

/// Selected entries of `r(H)` from per-pole (incomplete) selected inversion.
pub fn pexsi_evaluate(h: &SymmetricMatrix<C>, poles: &PoleExpansion, opts: &PexsiOptions<'_>) -> Result<PexsiResult> {
    let n = h.n();
    let hp = match opts.order {
        Some(p) => permute(h, p)?,
        None => h.clone(),
    };
    // Shifting only adds the diagonal, so one pattern serves all poles.
    let structure = hp.shift(poles.poles()[0].z);
    let pattern = symbolic_levels(&structure, opts.cutoff);
    let targets: Vec<(usize, usize)> = structure.iter().map(|(i, j, _)| (i, j)).collect();

    let run_set = |set: &PoleExpansion, offset: usize| -> Result<Vec<PoleRun>> {
        set.poles()
            .par_iter()
            .enumerate()
            .map(|(k, pole)| {
                let a = hp.shift(pole.z);
                let (f, e) = ldlt_incomplete(&a, &pattern, opts.track_dropped)
                    .map_err(|err| Error::Pole { index: offset + k, source: Box::new(err) })?;
                let (b, fd) = selinv_incomplete(&f, opts.track_dropped);
                let values = targets
                    .iter()
                    .map(|&(i, j)| b.get(i, j).expect("pattern contains the matrix structure"))
                    .collect();
                Ok(PoleRun {
                    values,
                    diag: PoleDiagnostics {
                        index: offset + k,
                        z: [pole.z.re, pole.z.im],
                        weight: [pole.weight.re, pole.weight.im],
                        cutoff: opts.cutoff.to_string(),
                        nnz_l: f.nnz_l(),
                        flops: f.flops() + b.flops(),
                        dropped_max: e.map(|e| e.max_abs()),
                        dropped_inverse_max: fd.map(|fd| fd.max_abs()),
                    },
                })
            })
            .collect()
    };

    let runs = run_set(poles, 0)?;
    let mut sum = vec![C::new(0.0, 0.0); targets.len()];
    for (run, pole) in runs.iter().zip(poles.poles()) {
        for (s, v) in sum.iter_mut().zip(&run.values) {
            *s += pole.weight * v;
        }
    }

    let energy = match opts.energy_poles {
        Some(ep) => {
            let eruns = run_set(ep, poles.len())?;
            let mut trace = C::new(0.0, 0.0);
            for (run, pole) in eruns.iter().zip(ep.poles()) {
                for (&(i, j), v) in targets.iter().zip(&run.values) {
                    if i == j {
                        trace += pole.weight * v;
                    }
                }
            }
            Some(trace.re)
        }
        None => None,
    };

    let inv = opts.order.map(|p| p.inverse().to_vec());
    let orig = |i: usize| inv.as_ref().map_or(i, |v| v[i]);
    let mut diagonal = vec![C::new(0.0, 0.0); n];
    let mut triplets = Vec::with_capacity(targets.len());
    for (&(i, j), &v) in targets.iter().zip(&sum) {
        let (oi, oj) = (orig(i), orig(j));
        if oi == oj {
            diagonal[oi] = v;
        }
        triplets.push((oi.max(oj), oi.min(oj), v));
    }
    let entries = SymmetricMatrix::from_triplets(n, &triplets)?;

    let report = QuantityReport {
        rho: diagonal.iter().map(|v| v.re).collect(),
        max_imag: diagonal.iter().map(|v| v.im.abs()).fold(0.0, f64::max),
        electrons: diagonal.iter().map(|v| v.re).sum(),
        energy,
        poles: runs.into_iter().map(|r| r.diag).collect(),
    };
    Ok(PexsiResult { entries, diagonal, report })
}

/// Density matrix `f(H)` with electron count and band energy, by full
/// eigendecomposition.
#[derive(Clone, Debug)]
pub struct DensityOracle {
    pub density: DenseMatrix<f64>,
    pub electrons: f64,
    pub energy: f64,
}

/// Fermi-Dirac density matrix of a real symmetric `h`.
pub fn dense_density_oracle(h: &DenseMatrix<f64>, beta: f64, ef: f64) -> Result<DensityOracle> {
    let eig = eigendecomposition(h)?;
    let n = h.n();
    let occ: Vec<f64> = eig.values.iter().map(|&e| fermi_dirac(e, beta, ef)).collect();
    let mut density = DenseMatrix::zeros(n);
    for (k, v) in eig.vectors.iter().enumerate() {
        let f = occ[k];
        for i in 0..n {
            let fi = f * v[i];
            for j in 0..n {
                density[(i, j)] += fi * v[j];
            }
        }
    }
    Ok(DensityOracle {
        density,
        electrons: occ.iter().sum(),
        energy: eig.values.iter().zip(&occ).map(|(e, f)| e * f).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{toy_hamiltonian, MeshSpec};

    #[test]
    fn fermi_dirac_values() {
        assert_eq!(fermi_dirac(0.3, 7.0, 0.3), 0.5);
        assert!((fermi_dirac(0.1, 10.0, 0.0) - 1.0 / (1.0 + 1f64.exp())).abs() < 1e-15);
        assert!((fermi_dirac(-1.0, 50.0, 0.0) - 1.0).abs() < 1e-15);
        assert!(fermi_dirac(1.0, 50.0, 0.0) < 1e-15);
        assert_eq!(fermi_dirac(1e6, 1e6, 0.0), 1.0 / (1.0 + EXP_CLAMP.exp()));
        assert_eq!(fermi_dirac(-1e6, 1e6, 0.0), 1.0);
        let xs: Vec<f64> = (0..50).map(|k| fermi_dirac(-2.0 + 0.1 * k as f64, 3.0, 0.0)).collect();
        assert!(xs.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn contour_reproduces_constants_and_identity() {
        let center = C::new(0.3, 0.0);
        let one = circle_contour_poles(64, center, 1.0, |_| C::new(1.0, 0.0)).unwrap();
        assert!((one.evaluate(center) - 1.0).norm() < 1e-10);
        let id = circle_contour_poles(64, center, 1.0, |z| z).unwrap();
        assert!((id.evaluate(center) - center).norm() < 1e-10);
        assert!(one.is_conjugate_closed(1e-14));
        assert!(circle_contour_poles(3, center, 1.0, |z| z).is_err());
    }

    #[test]
    fn contour_fermi_dirac_scalar() {
        let p = circle_contour_poles(128, C::new(-1.2, 0.0), 0.5, |z| fermi_dirac_complex(z, 5.0, 0.0)).unwrap();
        let x = -1.2;
        assert!((p.evaluate(C::new(x, 0.0)) - fermi_dirac(x, 5.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn single_pole_on_zero_matrix() {
        let h = SymmetricMatrix::<C>::zeros(3);
        let p = PoleExpansion::new(vec![Pole { weight: C::new(1.0, 0.0), z: C::new(0.0, 2.0) }]).unwrap();
        let r = pexsi_evaluate(&h, &p, &PexsiOptions::default()).unwrap();
        for v in &r.diagonal {
            assert!((v - C::new(0.0, 0.5)).norm() < 1e-15);
        }
    }

    #[test]
    fn pole_linearity() {
        let h = toy_hamiltonian::<C>(&MeshSpec::periodic(1, 20).unwrap()).unwrap();
        let p1 = circle_contour_poles(6, C::new(-1.2, 0.0), 0.5, |z| z).unwrap();
        let p2 = circle_contour_poles(4, C::new(1.2, 0.0), 0.4, |_| C::new(1.0, 0.0)).unwrap();
        let opts = PexsiOptions { cutoff: Cutoff::Level(3), ..Default::default() };
        let a = pexsi_evaluate(&h, &p1, &opts).unwrap();
        let b = pexsi_evaluate(&h, &p2, &opts).unwrap();
        let ab = pexsi_evaluate(&h, &p1.union(&p2), &opts).unwrap();
        for i in 0..20 {
            assert!((ab.diagonal[i] - a.diagonal[i] - b.diagonal[i]).norm() < 1e-13);
        }
        assert_eq!(ab.report.poles.len(), 10);
    }

    #[test]
    fn breakdown_is_tagged_with_pole() {
        let h = SymmetricMatrix::<C>::from_diagonal(&[C::new(1.0, 0.0), C::new(2.0, 0.0)]);
        let p = PoleExpansion::new(vec![
            Pole { weight: C::new(1.0, 0.0), z: C::new(0.0, 1.0) },
            Pole { weight: C::new(1.0, 0.0), z: C::new(2.0, 0.0) },
        ])
        .unwrap();
        match pexsi_evaluate(&h, &p, &PexsiOptions::default()) {
            Err(Error::Pole { index: 1, source }) => assert!(matches!(*source, Error::PivotBreakdown { .. })),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn density_oracle_basics() {
        let d = dense_density_oracle(&DenseMatrix::from_diagonal(&[-1.0, 1.0]), 1.0, 0.0).unwrap();
        assert!((d.electrons - 1.0).abs() < 1e-15);
        let id = dense_density_oracle(&DenseMatrix::identity(4), 2.0, 0.0).unwrap();
        let f1 = fermi_dirac(1.0, 2.0, 0.0);
        assert!(id.density.sub(&DenseMatrix::from_diagonal(&[f1; 4])).max_abs() < 1e-15);
    }

    #[test]
    fn half_filling_of_the_chain() {
        let h = toy_hamiltonian::<f64>(&MeshSpec::periodic(1, 100).unwrap()).unwrap();
        let d = dense_density_oracle(&h.to_dense(), 10.0, 0.0).unwrap();
        assert!((d.electrons - 50.0).abs() < 1e-10);
    }
}
