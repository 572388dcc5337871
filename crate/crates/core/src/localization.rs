//! Green's functions of real interval unions and exponential decay fits.
//!
//! For a compact set `E` of the real line, `g_E(z)` is the exponential rate
//! at which entries of `(H - z I)^{-1}` decay with graph distance when the
//! spectrum of `H` lies in `E`. Closed forms exist for one interval; for two
//! intervals the rate is an elliptic-type integral evaluated numerically.

use num_complex::Complex64 as C;

use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::scalar::Scalar;
use crate::sparse::{bfs_distances, SymmetricMatrix};
use crate::symbolic::FillPattern;

/// Absolute tolerance of the two-interval quadratures.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// Magnitudes below this are treated as numerically zero by [`fit_decay_rate`].
pub const MAGNITUDE_FLOOR: f64 = 1e-14;

/// Fewest distance bins [`fit_decay_rate`] accepts.
pub const MIN_BINS: usize = 5;

/// Green's function of `[a, b]` with pole at infinity.
///
/// `g(z) = log |w + sqrt*(w^2 - 1)|` for `w` the affine image of `z` in
/// `[-1, 1]`, where `sqrt*` is the principal root when `arg w` lies in
/// `(-pi/2, pi/2]` and its negative otherwise.
pub fn green_single_interval(a: f64, b: f64, z: C) -> f64 {
    let w = (z - C::new(0.5 * (a + b), 0.0)) * (2.0 / (b - a));
    green_unit_interval(w)
}

fn green_unit_interval(w: C) -> f64 {
    let mut r = (w * w - 1.0).sqrt();
    let arg = w.arg();
    if !(arg > -std::f64::consts::FRAC_PI_2 && arg <= std::f64::consts::FRAC_PI_2) {
        r = -r;
    }
    (w + r).norm().ln().max(0.0)
}

/// Green's function of `[a, b] ∪ [c, d]`, `a < b < c < d`.
///
/// `g(z) = -Re ∫_a^z f(u) (s - u) du` with
/// `f(u) = 1 / (sqrt(u-a) sqrt(u-b) sqrt(u-c) sqrt(u-d))` (principal roots)
/// and `s` the ratio of `∫ u f` and `∫ f` over the gap `(b, c)`, which makes
/// `g` vanish on both intervals.
pub fn green_two_intervals(a: f64, b: f64, c: f64, d: f64, z: C) -> Result<f64> {
    SpectralSet::new(vec![(a, b), (c, d)])?.green(z)
}

/// An ordered union of at most two disjoint closed intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSet {
    intervals: Vec<(f64, f64)>,
    // Balancing constant of the two-interval integrand.
    s: Option<f64>,
}

impl SpectralSet {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidSpectralSet("no intervals".into()));
        }
        if intervals.len() > 2 {
            return Err(Error::InvalidSpectralSet("at most two intervals are supported".into()));
        }
        for &(lo, hi) in &intervals {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidSpectralSet(format!("[{lo}, {hi}] is not a proper interval")));
            }
        }
        if intervals.len() == 2 && !(intervals[0].1 < intervals[1].0) {
            return Err(Error::InvalidSpectralSet("intervals must be sorted and disjoint".into()));
        }
        let s = if intervals.len() == 2 {
            let (a, b) = intervals[0];
            let (c, d) = intervals[1];
            Some(gap_balance(a, b, c, d)?)
        } else {
            None
        };
        Ok(Self { intervals, s })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![(a, b)])
    }

    /// `[-sqrt 2, -1] ∪ [1, sqrt 2]`, which contains the spectrum of the
    /// chequerboard model in every dimension.
    pub fn two_band() -> Self {
        let r = std::f64::consts::SQRT_2;
        Self::new(vec![(-r, -1.0), (1.0, r)]).expect("valid set")
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn contains(&self, z: C) -> bool {
        z.im == 0.0 && self.intervals.iter().any(|&(lo, hi)| lo <= z.re && z.re <= hi)
    }

    /// Euclidean distance from `z` to the set.
    pub fn distance(&self, z: C) -> f64 {
        self.intervals
            .iter()
            .map(|&(lo, hi)| C::new(z.re - z.re.clamp(lo, hi), z.im).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// `g_E(z)`; zero on the set.
    pub fn green(&self, z: C) -> Result<f64> {
        self.green_via(z, None)
    }

    /// `g_E(z)` integrating along a path that rises to height `height` above
    /// the left endpoint before heading to `z`. Any positive height gives the
    /// same value.
    pub fn green_via(&self, z: C, height: Option<f64>) -> Result<f64> {
        if self.contains(z) {
            return Ok(0.0);
        }
        match (self.intervals.as_slice(), self.s) {
            ([(a, b)], _) => Ok(green_single_interval(*a, *b, z)),
            ([(a, b), (c, d)], Some(s)) => {
                let h = height.unwrap_or(d - a);
                two_interval_integral(*a, *b, *c, *d, s, z, h)
            }
            _ => unreachable!("validated on construction"),
        }
    }
}

fn two_interval_f(a: f64, b: f64, c: f64, d: f64, u: C) -> C {
    1.0 / ((u - a).sqrt() * (u - b).sqrt() * (u - c).sqrt() * (u - d).sqrt())
}

/// `s = ∫_b^c u f(u) du / ∫_b^c f(u) du` via `u = b + (c-b) sin^2 θ`.
fn gap_balance(a: f64, b: f64, c: f64, d: f64) -> Result<f64> {
    let u = |t: f64| b + (c - b) * t.sin().powi(2);
    let h = |t: f64| {
        let x = u(t);
        1.0 / ((x - a).sqrt() * (d - x).sqrt())
    };
    let half_pi = std::f64::consts::FRAC_PI_2;
    let (num, _) = integrate(|t| C::new(u(t) * h(t), 0.0), 0.0, half_pi, QUADRATURE_TOL)?;
    let (den, _) = integrate(|t| C::new(h(t), 0.0), 0.0, half_pi, QUADRATURE_TOL)?;
    Ok(num.re / den.re)
}

fn two_interval_integral(a: f64, b: f64, c: f64, d: f64, s: f64, z: C, height: f64) -> Result<f64> {
    // g is symmetric under conjugation; work in the closed upper half plane.
    let z = C::new(z.re, z.im.abs());
    let integrand = |u: C| two_interval_f(a, b, c, d, u) * (s - u);
    // a -> a + i h with u = a + i tau^2 to absorb the endpoint singularity.
    let (rise, _) = integrate(
        |tau| {
            let u = C::new(a, tau * tau);
            integrand(u) * C::new(0.0, 2.0 * tau)
        },
        0.0,
        height.sqrt(),
        QUADRATURE_TOL,
    )?;
    let p = C::new(a, height);
    let dz = z - p;
    let (run, _) = integrate(|t| integrand(p + dz * t) * dz, 0.0, 1.0, QUADRATURE_TOL)?;
    Ok((-(rise + run).re).max(0.0))
}

/// Which decay a [`PredictedBounds`] describes.
#[derive(Clone, Copy, Debug)]
pub enum DecayMode<'a> {
    /// `|(H - z)^{-1}(i, j)| ≲ exp(-g d(i, j))` with graph distance `d`.
    Inverse,
    /// `|L(i, j)| ≲ exp(-g level(i, j))` with levels of fill from the pattern.
    Factor(&'a FillPattern),
}

/// Rate-level bounds `exp(-g · dist)` with unit prefactor.
#[derive(Clone, Debug)]
pub struct PredictedBounds<'a> {
    rate: f64,
    mode: DecayMode<'a>,
    adjacency: Vec<Vec<usize>>,
}

impl PredictedBounds<'_> {
    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Bound for entry `(i, j)`; zero where the entry is structurally zero.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match self.mode {
            DecayMode::Inverse => {
                bfs_distances(&self.adjacency, j)[i].map_or(0.0, |d| (-self.rate * d as f64).exp())
            }
            DecayMode::Factor(p) => p.level(i, j).map_or(0.0, |l| (-self.rate * l as f64).exp()),
        }
    }

    /// Bounds for a whole column, `out[i]` for entry `(i, j)`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        match self.mode {
            DecayMode::Inverse => bfs_distances(&self.adjacency, j)
                .into_iter()
                .map(|d| d.map_or(0.0, |d| (-self.rate * d as f64).exp()))
                .collect(),
            DecayMode::Factor(_) => (0..self.adjacency.len()).map(|i| self.entry(i, j)).collect(),
        }
    }
}

/// Decay predictions for `A = H - z I` with `spec(H) ⊂ set`.
pub fn predicted_bounds<'a, S: Scalar>(
    a: &SymmetricMatrix<S>,
    set: &SpectralSet,
    z: C,
    mode: DecayMode<'a>,
) -> Result<PredictedBounds<'a>> {
    if set.contains(z) {
        return Err(Error::PointOnSpectralSet { re: z.re, im: z.im });
    }
    Ok(PredictedBounds { rate: set.green(z)?, mode, adjacency: a.adjacency() })
}

/// Least-squares exponential fit of magnitude against distance.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit {
    /// `(distance, max magnitude)` per bin, distance ascending, floor applied.
    pub bins: Vec<(usize, f64)>,
    /// Fitted rate `alpha ≥ 0` in `max ≈ C exp(-alpha k)`.
    pub rate: f64,
    /// `log C`.
    pub intercept: f64,
    /// Inclusive distance range the fit used.
    pub range: (usize, usize),
    /// Root mean square residual of the log-magnitudes.
    pub residual: f64,
}

/// Fits `max_{dist = k} |entry| ≈ C exp(-alpha k)`.
///
/// Samples are `(distance, magnitude)` pairs. They are binned by distance
/// keeping the maximum, bins below [`MAGNITUDE_FLOOR`] are discarded and, if
/// `range` is given, only bins with distance in that inclusive range are
/// used. At least [`MIN_BINS`] bins must remain.
pub fn fit_decay_rate(
    samples: impl IntoIterator<Item = (usize, f64)>,
    range: Option<(usize, usize)>,
) -> Result<DecayFit> {
    let mut max_by: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
    for (k, v) in samples {
        let e = max_by.entry(k).or_insert(0.0);
        *e = e.max(v.abs());
    }
    let (lo, hi) = range.unwrap_or((0, usize::MAX));
    let bins: Vec<(usize, f64)> =
        max_by.into_iter().filter(|&(k, v)| v >= MAGNITUDE_FLOOR && k >= lo && k <= hi).collect();
    if bins.len() < MIN_BINS {
        return Err(Error::InsufficientBins { needed: MIN_BINS, found: bins.len() });
    }
    let m = bins.len() as f64;
    let xs: Vec<f64> = bins.iter().map(|b| b.0 as f64).collect();
    let ys: Vec<f64> = bins.iter().map(|b| b.1.ln()).collect();
    let xm = xs.iter().sum::<f64>() / m;
    let ym = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / m).sqrt();
    let range = (bins[0].0, bins[bins.len() - 1].0);
    Ok(DecayFit { bins, rate: (-slope).max(0.0), intercept, range, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{toy_hamiltonian, MeshSpec};
    use crate::symbolic::fill_pattern_exact;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn single_interval_closed_forms() {
        assert_eq!(green_single_interval(-1.0, 1.0, C::new(1.0, 0.0)), 0.0);
        assert!((green_single_interval(-1.0, 1.0, C::new(1.25, 0.0)) - 2f64.ln()).abs() < 1e-12);
        let v = green_single_interval(-1.0, 1.0, C::new(0.0, 2.0));
        assert!((v - (2.0 + 5f64.sqrt()).ln()).abs() < 1e-12);
        let v = green_single_interval(-1.0, 1.0, C::new(-1.25, 0.0));
        assert!((v - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn single_interval_vanishes_on_the_interval() {
        for k in 0..=40 {
            let x = -3.0 + 0.1 * k as f64;
            let v = green_single_interval(-3.0, 1.0, C::new(x, 0.0));
            assert!(v.abs() < 1e-12, "{x}: {v}");
        }
        for (x, y) in [(0.0, 0.1), (5.0, 0.0), (-4.0, -1.0)] {
            assert!(green_single_interval(-3.0, 1.0, C::new(x, y)) > 0.0);
        }
    }

    #[test]
    fn affine_map() {
        for z in [C::new(0.3, 0.7), C::new(4.0, -2.0), C::new(-1.5, 0.0)] {
            let direct = green_single_interval(1.0, 3.0, z);
            let mapped = green_single_interval(-1.0, 1.0, z - 2.0);
            assert!((direct - mapped).abs() < 1e-12);
        }
    }

    #[test]
    fn two_band_matches_squared_map() {
        // For E = -E, g_E(z) = g_{[1,2]}(z^2) / 2.
        let set = SpectralSet::two_band();
        for z in [C::new(0.98, 0.0), C::new(0.0, 0.0), C::new(0.5, 0.3), C::new(2.0, 1.0), C::new(-0.2, -0.4)] {
            let g = set.green(z).unwrap();
            let oracle = 0.5 * green_single_interval(1.0, 2.0, z * z);
            assert!((g - oracle).abs() < 1e-8, "{z}: {g} vs {oracle}");
        }
    }

    #[test]
    fn two_band_is_even_and_vanishes_on_the_set() {
        let set = SpectralSet::two_band();
        let g0 = set.green(C::new(0.0, 0.0)).unwrap();
        assert_eq!(g0, set.green(C::new(-0.0, 0.0)).unwrap());
        let g1 = set.green(C::new(0.7, 0.2)).unwrap();
        let g2 = set.green(C::new(-0.7, 0.2)).unwrap();
        assert!((g1 - g2).abs() < 1e-9);
        for x in [1.0, 1.2, SQRT2, -1.1] {
            assert_eq!(set.green(C::new(x, 0.0)).unwrap(), 0.0);
        }
        assert!(set.green(C::new(1.0 - 1e-9, 0.0)).unwrap() < 1e-3);
    }

    #[test]
    fn path_independence() {
        let set = SpectralSet::new(vec![(-2.0, -0.5), (0.3, 1.0)]).unwrap();
        for z in [C::new(0.0, 0.0), C::new(-0.1, 0.4), C::new(3.0, -1.0)] {
            let low = set.green_via(z, Some(0.2)).unwrap();
            let high = set.green_via(z, Some(5.0)).unwrap();
            assert!((low - high).abs() < 1e-8, "{z}: {low} vs {high}");
        }
    }

    #[test]
    fn merged_gap_limit() {
        let eps = 1e-3;
        let g = green_two_intervals(-1.0, -eps, eps, 1.0, C::new(0.0, 2.0)).unwrap();
        let single = green_single_interval(-1.0, 1.0, C::new(0.0, 2.0));
        assert!((g - single).abs() < 1e-3, "{g} vs {single}");
    }

    #[test]
    fn widening_the_gap_raises_g() {
        let z = C::new(0.05, 0.0);
        let narrow = green_two_intervals(-1.0, -0.2, 0.3, 1.0, z).unwrap();
        let wide = green_two_intervals(-1.0, -0.4, 0.5, 1.0, z).unwrap();
        assert!(wide >= narrow);
    }

    #[test]
    fn invalid_sets() {
        assert!(SpectralSet::new(vec![]).is_err());
        assert!(SpectralSet::new(vec![(1.0, 0.0)]).is_err());
        assert!(SpectralSet::new(vec![(0.0, 2.0), (1.0, 3.0)]).is_err());
        assert!(SpectralSet::new(vec![(0.0, 1.0), (2.0, 3.0), (4.0, 5.0)]).is_err());
    }

    #[test]
    fn distance_to_set() {
        let set = SpectralSet::two_band();
        assert!((set.distance(C::new(0.98, 0.0)) - 0.02).abs() < 1e-15);
        assert!((set.distance(C::new(0.0, 0.0)) - 1.0).abs() < 1e-15);
        assert_eq!(set.distance(C::new(1.2, 0.0)), 0.0);
    }

    #[test]
    fn predicted_bounds_on_the_chain() {
        let h = toy_hamiltonian::<f64>(&MeshSpec::periodic(1, 6).unwrap()).unwrap();
        let set = SpectralSet::two_band();
        let z = C::new(0.98, 0.0);
        let g = set.green(z).unwrap();
        let pat = fill_pattern_exact(&h);
        let fb = predicted_bounds(&h, &set, z, DecayMode::Factor(&pat)).unwrap();
        assert!((fb.entry(5, 3) - (-3.0 * g).exp()).abs() < 1e-15);
        assert_eq!(fb.entry(2, 2), 1.0);
        let ib = predicted_bounds(&h, &set, z, DecayMode::Inverse).unwrap();
        assert!((ib.entry(0, 3) - (-3.0 * g).exp()).abs() < 1e-15);
        assert_eq!(ib.column(0)[0], 1.0);
        assert!(matches!(
            predicted_bounds(&h, &set, C::new(1.1, 0.0), DecayMode::Inverse),
            Err(Error::PointOnSpectralSet { .. })
        ));
    }

    #[test]
    fn fit_recovers_exact_exponential() {
        let fit = fit_decay_rate((0..20).map(|k| (k, 3.0 * (-0.7 * k as f64).exp())), None).unwrap();
        assert!((fit.rate - 0.7).abs() < 1e-9);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-9);
        let flat = fit_decay_rate((0..10).map(|k| (k, 0.5)), None).unwrap();
        assert_eq!(flat.rate, 0.0);
    }

    #[test]
    fn fit_bins_by_maximum_and_respects_range() {
        let mut s: Vec<(usize, f64)> = (0..30).map(|k| (k, (-0.5 * k as f64).exp())).collect();
        s.extend((0..30).map(|k| (k, 1e-3 * (-0.5 * k as f64).exp())));
        let fit = fit_decay_rate(s.iter().copied(), Some((5, 12))).unwrap();
        assert_eq!(fit.range, (5, 12));
        assert!((fit.rate - 0.5).abs() < 1e-9);
        assert!(matches!(
            fit_decay_rate(s.iter().copied(), Some((5, 8))),
            Err(Error::InsufficientBins { needed: 5, found: 4 })
        ));
        assert!(matches!(fit_decay_rate(vec![(0, 1e-20); 10], None), Err(Error::InsufficientBins { .. })));
    }
}
