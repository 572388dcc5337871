//! Experiment drivers on the chequerboard model producing CSV tables.
//!
//! Every table starts with a `#` line echoing the configuration. Apart from
//! wall-clock columns, output depends only on the configuration and seed.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64 as C;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dense::ORACLE_CAP;
use crate::error::{Error, Result};
use crate::factorization::{ldlt_exact, ldlt_incomplete};
use crate::localization::SpectralSet;
use crate::mesh::{toy_hamiltonian, MeshSpec};
use crate::ordering::{nested_dissection_cartesian, permute, Permutation};
use crate::pexsi::{circle_contour_poles, fermi_dirac_complex, pexsi_evaluate, PexsiOptions};
use crate::selinv::{selinv_exact, selinv_incomplete};
use crate::sparse::{bfs_distances, SymmetricMatrix};
use crate::symbolic::{fill_pattern_exact, symbolic_levels, Cutoff};

/// Inverse columns sampled by the localization study on large meshes.
pub const SAMPLED_COLUMNS: usize = 64;

/// Contour of the pexsi study: a circle around the lower band of the model.
pub const PEXSI_CENTER: f64 = -1.2;
pub const PEXSI_RADIUS: f64 = 0.5;
pub const PEXSI_BETA: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StudyKind {
    Localization,
    Convergence,
    NScaling,
    CScaling,
    Periodic1d,
    Pexsi,
}

impl StudyKind {
    pub fn is_timing(self) -> bool {
        matches!(self, Self::NScaling | Self::CScaling)
    }
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Localization => "localization",
            Self::Convergence => "convergence",
            Self::NScaling => "nscaling",
            Self::CScaling => "cscaling",
            Self::Periodic1d => "periodic1d",
            Self::Pexsi => "pexsi",
        })
    }
}

impl FromStr for StudyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "localization" => Self::Localization,
            "convergence" => Self::Convergence,
            "nscaling" => Self::NScaling,
            "cscaling" => Self::CScaling,
            "periodic1d" => Self::Periodic1d,
            "pexsi" => Self::Pexsi,
            _ => return Err(Error::Config(format!("unknown study '{s}'"))),
        })
    }
}

/// Vertex numbering used before factorization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderKind {
    /// Lexicographic mesh order.
    Natural,
    NestedDissection,
}

impl fmt::Display for OrderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Natural => "natural",
            Self::NestedDissection => "nd",
        })
    }
}

impl FromStr for OrderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "natural" => Ok(Self::Natural),
            "nd" => Ok(Self::NestedDissection),
            _ => Err(Error::Config(format!("unknown ordering '{s}' (expected natural or nd)"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct StudyConfig {
    pub kind: StudyKind,
    pub mesh: MeshSpec,
    /// Shift of `A = H - z I`.
    pub z: C,
    /// Cutoff levels, positive and strictly ascending.
    pub cutoffs: Vec<u16>,
    /// Timing repetitions; the minimum is reported.
    pub reps: usize,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub order: OrderKind,
    /// Side lengths swept by the `nscaling` study.
    pub sizes: Vec<usize>,
    /// Contour poles of the `pexsi` study.
    pub poles: usize,
}

impl StudyConfig {
    /// Defaults: `z = 0.98`, cutoffs `1..=10`, three repetitions, seed 0,
    /// nested dissection except on chains.
    pub fn new(kind: StudyKind, mesh: MeshSpec) -> Self {
        Self {
            kind,
            mesh,
            z: C::new(0.98, 0.0),
            cutoffs: (1..=10).collect(),
            reps: 3,
            out: None,
            seed: 0,
            order: if mesh.dim == 1 { OrderKind::Natural } else { OrderKind::NestedDissection },
            sizes: vec![16, 32, 64],
            poles: 16,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.mesh.validate()?;
        if self.cutoffs.is_empty() {
            return Err(Error::Config("cutoff list is empty".into()));
        }
        if self.cutoffs[0] == 0 || self.cutoffs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("cutoffs must be positive and strictly ascending".into()));
        }
        if self.kind.is_timing() && self.reps < 3 {
            return Err(Error::Config(format!("timing studies need at least 3 repetitions, got {}", self.reps)));
        }
        if self.kind == StudyKind::NScaling && self.sizes.is_empty() {
            return Err(Error::Config("size list is empty".into()));
        }
        if self.kind == StudyKind::Periodic1d && self.mesh.dim != 1 {
            return Err(Error::Config("the periodic1d study needs a one-dimensional mesh".into()));
        }
        Ok(())
    }

    /// One-line description of every field.
    pub fn echo(&self) -> String {
        let list = |v: &mut dyn Iterator<Item = String>| v.collect::<Vec<_>>().join(" ");
        format!(
            "study={} dim={} m={} periodic={} z=({},{}) order={} cutoffs=[{}] reps={} seed={} sizes=[{}] poles={} out={}",
            self.kind,
            self.mesh.dim,
            self.mesh.m,
            self.mesh.periodic,
            self.z.re,
            self.z.im,
            self.order,
            list(&mut self.cutoffs.iter().map(|c| c.to_string())),
            self.reps,
            self.seed,
            list(&mut self.sizes.iter().map(|s| s.to_string())),
            self.poles,
            self.out.as_ref().map_or("-".into(), |p| p.display().to_string()),
        )
    }
}

/// A CSV table with a configuration comment line.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub comment: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "# {}", self.comment)?;
        writeln!(w, "{}", self.columns.join(","))?;
        for r in &self.rows {
            writeln!(w, "{}", r.join(","))?;
        }
        Ok(())
    }

    /// Values of one column.
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let k = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[k].as_str()).collect())
    }
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn ordering(spec: &MeshSpec, kind: OrderKind) -> Result<Permutation> {
    match kind {
        OrderKind::Natural => Ok(Permutation::identity(spec.num_vertices())),
        OrderKind::NestedDissection => nested_dissection_cartesian(spec),
    }
}

/// `H - z I` for the chequerboard model, reordered, with its ordering.
pub fn shifted_model(spec: &MeshSpec, z: C, order: OrderKind) -> Result<(SymmetricMatrix<C>, Permutation)> {
    let a = toy_hamiltonian::<C>(spec)?.shift(z);
    let p = ordering(spec, order)?;
    Ok((permute(&a, &p)?, p))
}

/// Per-bin maxima of the localization study.
#[derive(Clone, Debug)]
pub struct LocalizationStudy {
    /// Green's function value at `z`.
    pub rate: f64,
    /// `(level, max |L|)` of the exact factor.
    pub factor_bins: Vec<(usize, f64)>,
    /// `(graph distance, max |A^{-1}|)` over the sampled columns.
    pub inverse_bins: Vec<(usize, f64)>,
    /// Sampled inverse columns, original numbering.
    pub columns: Vec<usize>,
}

fn bin_max(samples: impl IntoIterator<Item = (usize, f64)>) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::new();
    for (k, v) in samples {
        if out.len() <= k {
            out.extend((out.len()..=k).map(|d| (d, 0.0)));
        }
        out[k].1 = out[k].1.max(v);
    }
    out
}

/// Decay of `|L|` against level of fill and of `|A^{-1}|` against graph
/// distance for `A = H - z I`.
///
/// Inverse columns are obtained by solves with the exact factors; meshes
/// with more than [`SAMPLED_COLUMNS`] vertices use a seeded random subset.
pub fn localization_study(cfg: &StudyConfig) -> Result<LocalizationStudy> {
    let set = SpectralSet::two_band();
    if set.contains(cfg.z) {
        return Err(Error::PointOnSpectralSet { re: cfg.z.re, im: cfg.z.im });
    }
    let rate = set.green(cfg.z)?;
    let (a, p) = shifted_model(&cfg.mesh, cfg.z, cfg.order)?;
    let n = a.n();
    let f = ldlt_exact(&a)?;
    let factor_bins =
        bin_max(f.pattern().iter().zip(f.l_values()).map(|((_, _, lev), v)| (lev as usize, v.norm())));

    let columns: Vec<usize> = if n <= SAMPLED_COLUMNS {
        (0..n).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut c = rand::seq::index::sample(&mut rng, n, SAMPLED_COLUMNS).into_vec();
        c.sort_unstable();
        c
    };
    let adjacency = toy_hamiltonian::<f64>(&cfg.mesh)?.adjacency();
    let per_column: Vec<Vec<(usize, f64)>> = columns
        .par_iter()
        .map(|&j| {
            let mut e = vec![C::new(0.0, 0.0); n];
            e[p.apply(j)] = C::new(1.0, 0.0);
            let x = f.solve(&e);
            bfs_distances(&adjacency, j)
                .into_iter()
                .enumerate()
                .filter_map(|(i, d)| d.map(|d| (d, x[p.apply(i)].norm())))
                .collect()
        })
        .collect();
    let inverse_bins = bin_max(per_column.into_iter().flatten());
    Ok(LocalizationStudy { rate, factor_bins, inverse_bins, columns })
}

impl LocalizationStudy {
    pub fn table(&self, cfg: &StudyConfig) -> Table {
        let rows = [("level", &self.factor_bins), ("distance", &self.inverse_bins)]
            .into_iter()
            .flat_map(|(kind, bins)| {
                bins.iter().map(move |&(k, v)| {
                    vec![kind.to_string(), k.to_string(), num(v), num((-self.rate * k as f64).exp())]
                })
            })
            .collect();
        Table { comment: cfg.echo(), columns: vec!["distance_kind", "distance", "max_abs", "predicted"], rows }
    }
}

/// One cutoff of the convergence study. Errors are maxima over the
/// nonzero pattern of `H` (diagonal included).
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub c: u16,
    /// `max |A^{-1} - (A + E)^{-1}|`.
    pub err_factorization: f64,
    /// `max |A^{-1} - B|` with `B` from incomplete selected inversion.
    pub err_selinv: f64,
    /// Predicted error scale.
    pub bound: f64,
    /// Positions `(i, j)`, `i > j`, of the nonzeros of `E` in original
    /// numbering.
    pub dropped: Vec<(usize, usize)>,
}

/// Errors of incomplete factorization and selected inversion against the
/// dense inverse for each cutoff. `bound` is `exp(-2 g c)`.
pub fn convergence_study(cfg: &StudyConfig) -> Result<Vec<ConvergenceRow>> {
    convergence_rows(cfg, |g, c| (-2.0 * g * c as f64).exp())
}

/// Convergence on a periodic chain, where the error stagnates once the
/// cutoff passes half the chain. `bound` is `exp(-2 g (c + 1))` for
/// `c <= (n - 4) / 2` and `exp(-g (n - 2))` beyond.
pub fn periodic1d_study(cfg: &StudyConfig) -> Result<Vec<ConvergenceRow>> {
    if cfg.mesh.dim != 1 {
        return Err(Error::Config("the periodic1d study needs a one-dimensional mesh".into()));
    }
    let n = cfg.mesh.num_vertices() as f64;
    convergence_rows(cfg, |g, c| {
        let c = c as f64;
        if c <= (n - 4.0) / 2.0 {
            (-2.0 * g * (c + 1.0)).exp()
        } else {
            (-g * (n - 2.0)).exp()
        }
    })
}

fn convergence_rows(cfg: &StudyConfig, bound: impl Fn(f64, u16) -> f64 + Sync) -> Result<Vec<ConvergenceRow>> {
    let n = cfg.mesh.num_vertices();
    if n > ORACLE_CAP {
        return Err(Error::OracleCap { n, cap: ORACLE_CAP });
    }
    let g = SpectralSet::two_band().green(cfg.z)?;
    let (a, p) = shifted_model(&cfg.mesh, cfg.z, cfg.order)?;
    let inv = a.to_dense().inverse()?;
    let exact = fill_pattern_exact(&a);
    let targets: Vec<(usize, usize)> = a.iter().map(|(i, j, _)| (i, j)).collect();
    let max_err = |get: &dyn Fn(usize, usize) -> C| {
        targets.iter().map(|&(i, j)| (get(i, j) - inv[(i, j)]).norm()).fold(0.0, f64::max)
    };
    cfg.cutoffs
        .par_iter()
        .map(|&c| {
            let pattern = exact.truncate(Cutoff::Level(c));
            let (f, e) = ldlt_incomplete(&a, &pattern, true)?;
            let (b, _) = selinv_incomplete(&f, false);
            // The exact pattern is closed and contains the incomplete one.
            let bt = selinv_exact(&f.embed(&exact)?);
            let mut dropped: Vec<(usize, usize)> = e
                .expect("tracking was requested")
                .nonzeros()
                .map(|(i, j, _)| {
                    let (oi, oj) = (p.apply_inverse(i), p.apply_inverse(j));
                    (oi.max(oj), oi.min(oj))
                })
                .collect();
            dropped.sort_unstable();
            Ok(ConvergenceRow {
                c,
                err_factorization: max_err(&|i, j| bt.get(i, j).expect("closed pattern covers A")),
                err_selinv: max_err(&|i, j| b.get(i, j).expect("pattern covers A")),
                bound: bound(g, c),
                dropped,
            })
        })
        .collect()
}

pub fn convergence_table(cfg: &StudyConfig, rows: &[ConvergenceRow]) -> Table {
    let with_dropped = cfg.kind == StudyKind::Periodic1d;
    let mut columns = vec!["c", "err_factorization", "err_selinv", "bound"];
    if with_dropped {
        columns.extend(["dropped_count", "dropped_positions"]);
    }
    let rows = rows
        .iter()
        .map(|r| {
            let mut v = vec![r.c.to_string(), num(r.err_factorization), num(r.err_selinv), num(r.bound)];
            if with_dropped {
                v.push(r.dropped.len().to_string());
                let pos: Vec<String> = r.dropped.iter().map(|(i, j)| format!("({} {})", i + 1, j + 1)).collect();
                v.push(pos.join(" "));
            }
            v
        })
        .collect();
    Table { comment: cfg.echo(), columns, rows }
}

/// One point of a scaling study.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingRow {
    /// Number of vertices (`nscaling`) or cutoff (`cscaling`).
    pub x: usize,
    /// Minimum over repetitions of symbolic + numeric factorization and
    /// selected inversion.
    pub wall_seconds: f64,
    /// Multiply-adds of factorization plus selected inversion.
    pub flops: u64,
}

fn timed_run(a: &SymmetricMatrix<C>, c: u16, reps: usize) -> Result<(f64, u64)> {
    let mut best = f64::INFINITY;
    let mut flops = 0;
    for _ in 0..reps.max(1) {
        let t = Instant::now();
        let pattern = symbolic_levels(a, Cutoff::Level(c));
        let (f, _) = ldlt_incomplete(a, &pattern, false)?;
        let (b, _) = selinv_incomplete(&f, false);
        best = best.min(t.elapsed().as_secs_f64());
        flops = f.flops() + b.flops();
    }
    Ok((best, flops))
}

/// Cost against mesh size at the first cutoff of `cfg`, over `cfg.sizes`.
pub fn nscaling_study(cfg: &StudyConfig) -> Result<Vec<ScalingRow>> {
    let c = cfg.cutoffs[0];
    cfg.sizes
        .iter()
        .map(|&m| {
            let spec = MeshSpec::new(cfg.mesh.dim, m, cfg.mesh.periodic)?;
            let (a, _) = shifted_model(&spec, cfg.z, cfg.order)?;
            let (wall_seconds, flops) = timed_run(&a, c, cfg.reps)?;
            Ok(ScalingRow { x: a.n(), wall_seconds, flops })
        })
        .collect()
}

/// Cost against cutoff on a fixed mesh.
pub fn cscaling_study(cfg: &StudyConfig) -> Result<Vec<ScalingRow>> {
    let (a, _) = shifted_model(&cfg.mesh, cfg.z, cfg.order)?;
    cfg.cutoffs
        .iter()
        .map(|&c| {
            let (wall_seconds, flops) = timed_run(&a, c, cfg.reps)?;
            Ok(ScalingRow { x: c as usize, wall_seconds, flops })
        })
        .collect()
}

pub fn scaling_table(cfg: &StudyConfig, rows: &[ScalingRow]) -> Table {
    let x = if cfg.kind == StudyKind::NScaling { "n" } else { "c" };
    Table {
        comment: cfg.echo(),
        columns: vec![x, "wall_seconds", "flop_count"],
        rows: rows.iter().map(|r| vec![r.x.to_string(), num(r.wall_seconds), r.flops.to_string()]).collect(),
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let xm = xs.iter().sum::<f64>() / m;
    let ym = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    sxy / sxx
}

/// One cutoff of the pole-expansion study.
#[derive(Clone, Debug, PartialEq)]
pub struct PexsiRow {
    pub cutoff: Cutoff,
    /// Largest deviation of the diagonal from the exact-cutoff result.
    pub max_diag_error: f64,
    pub electrons: f64,
    pub max_imag: f64,
    pub flops: u64,
}

/// Fermi-Dirac diagonal from a circle contour around the lower band, for
/// each cutoff and for the exact pattern (last row).
pub fn pexsi_study(cfg: &StudyConfig) -> Result<Vec<PexsiRow>> {
    let h = toy_hamiltonian::<C>(&cfg.mesh)?;
    let p = ordering(&cfg.mesh, cfg.order)?;
    let poles = circle_contour_poles(cfg.poles, C::new(PEXSI_CENTER, 0.0), PEXSI_RADIUS, |z| {
        fermi_dirac_complex(z, PEXSI_BETA, 0.0)
    })?;
    let run = |cutoff| {
        pexsi_evaluate(&h, &poles, &PexsiOptions { cutoff, order: Some(&p), ..Default::default() })
    };
    let exact = run(Cutoff::Exact)?;
    let row = |cutoff, r: &crate::pexsi::PexsiResult| PexsiRow {
        cutoff,
        max_diag_error: r.diagonal.iter().zip(&exact.diagonal).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max),
        electrons: r.report.electrons,
        max_imag: r.report.max_imag,
        flops: r.report.poles.iter().map(|d| d.flops).sum(),
    };
    let mut rows = cfg
        .cutoffs
        .iter()
        .map(|&c| Ok(row(Cutoff::Level(c), &run(Cutoff::Level(c))?)))
        .collect::<Result<Vec<_>>>()?;
    rows.push(row(Cutoff::Exact, &exact));
    Ok(rows)
}

pub fn pexsi_table(cfg: &StudyConfig, rows: &[PexsiRow]) -> Table {
    Table {
        comment: cfg.echo(),
        columns: vec!["cutoff", "max_diag_error", "electrons", "max_imag", "flop_count"],
        rows: rows
            .iter()
            .map(|r| {
                vec![r.cutoff.to_string(), num(r.max_diag_error), num(r.electrons), num(r.max_imag), r.flops.to_string()]
            })
            .collect(),
    }
}

/// Localization table for `cfg`.
pub fn run_localization_study(cfg: &StudyConfig) -> Result<Table> {
    cfg.validate()?;
    Ok(localization_study(cfg)?.table(cfg))
}

/// Convergence table for `cfg`; the `periodic1d` kind adds the positions
/// of the dropped factor entries.
pub fn run_convergence_study(cfg: &StudyConfig) -> Result<Table> {
    cfg.validate()?;
    let rows = if cfg.kind == StudyKind::Periodic1d { periodic1d_study(cfg)? } else { convergence_study(cfg)? };
    Ok(convergence_table(cfg, &rows))
}

/// Scaling table against `n` for the `nscaling` kind and against `c`
/// otherwise.
pub fn run_scaling_study(cfg: &StudyConfig) -> Result<Table> {
    cfg.validate()?;
    let rows = if cfg.kind == StudyKind::NScaling { nscaling_study(cfg)? } else { cscaling_study(cfg)? };
    Ok(scaling_table(cfg, &rows))
}

/// Validates `cfg` and runs the study it names.
pub fn run_study(cfg: &StudyConfig) -> Result<Table> {
    match cfg.kind {
        StudyKind::Localization => run_localization_study(cfg),
        StudyKind::Convergence | StudyKind::Periodic1d => run_convergence_study(cfg),
        StudyKind::NScaling | StudyKind::CScaling => run_scaling_study(cfg),
        StudyKind::Pexsi => {
            cfg.validate()?;
            Ok(pexsi_table(cfg, &pexsi_study(cfg)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(kind: StudyKind, dim: usize, m: usize) -> StudyConfig {
        StudyConfig::new(kind, MeshSpec::periodic(dim, m).unwrap())
    }

    #[test]
    fn config_validation() {
        let mut c = cfg(StudyKind::CScaling, 2, 8);
        assert!(c.validate().is_ok());
        c.reps = 2;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        c.reps = 3;
        c.cutoffs = vec![2, 2];
        assert!(c.validate().is_err());
        c.cutoffs = vec![0, 1];
        assert!(c.validate().is_err());
        assert!(cfg(StudyKind::Periodic1d, 2, 8).validate().is_err());
        assert_eq!("nscaling".parse::<StudyKind>().unwrap(), StudyKind::NScaling);
        assert!("histogram".parse::<StudyKind>().is_err());
    }

    #[test]
    fn echo_names_every_field() {
        let e = cfg(StudyKind::Convergence, 2, 8).echo();
        for key in ["study=", "dim=", "m=", "periodic=", "z=", "order=", "cutoffs=", "reps=", "seed=", "sizes=", "poles=", "out="] {
            assert!(e.contains(key), "{key}");
        }
    }

    #[test]
    fn localization_is_seed_deterministic() {
        let mut c = cfg(StudyKind::Localization, 2, 10);
        c.seed = 11;
        let t1 = run_study(&c).unwrap();
        let t2 = run_study(&c).unwrap();
        assert_eq!(t1, t2);
        c.seed = 12;
        let s = localization_study(&c).unwrap();
        assert_eq!(s.columns.len(), SAMPLED_COLUMNS);
        assert_ne!(s.columns, localization_study(&cfg(StudyKind::Localization, 2, 10)).unwrap().columns);
    }

    #[test]
    fn localization_small_mesh_uses_all_columns() {
        let s = localization_study(&cfg(StudyKind::Localization, 1, 12)).unwrap();
        assert_eq!(s.columns, (0..12).collect::<Vec<_>>());
        // On a ring of 12 the largest distance is 6.
        assert_eq!(s.inverse_bins.last().unwrap().0, 6);
        assert!(s.inverse_bins[0].1 > s.inverse_bins[6].1);
    }

    #[test]
    fn localization_rejects_points_on_the_set() {
        let mut c = cfg(StudyKind::Localization, 1, 8);
        c.z = C::new(1.2, 0.0);
        assert!(matches!(localization_study(&c), Err(Error::PointOnSpectralSet { .. })));
    }

    #[test]
    fn convergence_refuses_large_meshes() {
        let c = cfg(StudyKind::Convergence, 2, 50);
        assert!(matches!(convergence_study(&c), Err(Error::OracleCap { .. })));
    }

    #[test]
    fn convergence_errors_shrink() {
        let mut c = cfg(StudyKind::Convergence, 2, 8);
        c.cutoffs = vec![1, 3, 5, 20];
        let rows = convergence_study(&c).unwrap();
        assert!(rows[0].err_selinv > rows[2].err_selinv);
        assert!(rows[3].err_selinv < 1e-12 && rows[3].err_factorization < 1e-12);
        assert!(rows[3].dropped.is_empty());
        let t = convergence_table(&c, &rows);
        assert_eq!(t.columns, ["c", "err_factorization", "err_selinv", "bound"]);
    }

    #[test]
    fn periodic_chain_drops_two_entries() {
        let mut c = cfg(StudyKind::Periodic1d, 1, 20);
        c.order = OrderKind::Natural;
        c.cutoffs = vec![1, 4, 8];
        for r in periodic1d_study(&c).unwrap() {
            assert_eq!(r.dropped, vec![(19, r.c as usize + 1)]);
        }
    }

    #[test]
    fn scaling_tables() {
        let mut c = cfg(StudyKind::NScaling, 2, 8);
        c.sizes = vec![8, 16];
        c.cutoffs = vec![2];
        let rows = nscaling_study(&c).unwrap();
        assert_eq!(rows.iter().map(|r| r.x).collect::<Vec<_>>(), [64, 256]);
        assert!(rows[1].flops > rows[0].flops);
        let t = run_study(&c).unwrap();
        assert_eq!(t.columns[0], "n");
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# study=nscaling"));
        assert_eq!(text.lines().nth(1), Some("n,wall_seconds,flop_count"));
    }

    #[test]
    fn loglog_slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (1..10).map(|k| (k as f64, 3.0 * (k as f64).powi(3))).collect();
        assert!((loglog_slope(&pts) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn pexsi_rows_end_with_exact() {
        let mut c = cfg(StudyKind::Pexsi, 1, 16);
        c.cutoffs = vec![1, 20];
        c.poles = 8;
        let rows = pexsi_study(&c).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[2].cutoff, Cutoff::Exact);
        assert_eq!(rows[2].max_diag_error, 0.0);
        assert!(rows[1].max_diag_error < 1e-12);
        assert!(rows[0].max_diag_error > rows[1].max_diag_error);
    }
}
