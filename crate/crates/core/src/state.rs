//! Initial states: boosted Gaussian orbitals, their antisymmetrized
//! (Slater) combination, and one-body marginal densities.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{self, GridSpec};

/// Largest tail mass tolerated in the outermost samples of an orbital.
const MAX_EDGE_TAIL_MASS: f64 = 1e-12;
const EDGE_SAMPLES: usize = 5;

/// A single-particle Gaussian `exp(-(x-x₀)²/2σ²)·exp(i p₀ (x-x₀))`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitalSpec {
    pub center: f64,
    pub boost: f64,
    pub width: f64,
}

impl OrbitalSpec {
    pub fn new(center: f64, boost: f64, width: f64) -> Self {
        OrbitalSpec { center, boost, width }
    }

    pub fn validate(&self, half_width: f64) -> Result<()> {
        if !(self.width > 0.0) {
            return Err(Error::invalid(format!("orbital width must be positive, got {}", self.width)));
        }
        if self.center.abs() + 4.0 * self.width >= half_width {
            return Err(Error::invalid(format!(
                "orbital at {} with width {} does not fit in [-{half_width}, {half_width})",
                self.center, self.width
            )));
        }
        Ok(())
    }
}

/// L2-normalized Gaussian orbital sampled on the grid axis.
pub fn gaussian_orbital(spec: &OrbitalSpec, grid: &GridSpec) -> Result<Vec<Complex64>> {
    spec.validate(grid.half_width())?;
    let mut orbital: Vec<Complex64> = grid
        .positions()
        .iter()
        .map(|&x| {
            let u = x - spec.center;
            Complex64::from_polar((-u * u / (2.0 * spec.width * spec.width)).exp(), spec.boost * u)
        })
        .collect();
    let norm = (orbital.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.dx()).sqrt();
    orbital.iter_mut().for_each(|z| *z /= norm);

    let m = orbital.len();
    let tail: f64 = orbital[..EDGE_SAMPLES]
        .iter()
        .chain(&orbital[m - EDGE_SAMPLES..])
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        * grid.dx();
    if tail > MAX_EDGE_TAIL_MASS {
        return Err(Error::StateExceedsBox { tail_mass: tail });
    }
    Ok(orbital)
}

/// Complex amplitudes on the configuration grid at one time.
#[derive(Clone, Debug)]
pub struct WaveFunction {
    grid: Arc<GridSpec>,
    amplitudes: Vec<Complex64>,
    time: f64,
}

impl WaveFunction {
    pub fn new(grid: Arc<GridSpec>, amplitudes: Vec<Complex64>, time: f64) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::invalid(format!(
                "{} amplitudes for a grid of {} points",
                amplitudes.len(),
                grid.len()
            )));
        }
        Ok(WaveFunction { grid, amplitudes, time })
    }

    /// A one-particle state from a single orbital.
    ///
    /// # Panics
    ///
    /// If the grid is not a one-particle grid of matching length.
    pub fn from_orbital(grid: Arc<GridSpec>, orbital: Vec<Complex64>) -> Self {
        assert_eq!(grid.n_particles(), 1);
        WaveFunction::new(grid, orbital, 0.0).expect("orbital length matches the grid")
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub(crate) fn amplitude_vec_mut(&mut self) -> &mut Vec<Complex64> {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    pub fn n_particles(&self) -> usize {
        self.grid.n_particles()
    }

    /// `Σ|Ψ|² dx^N`.
    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.volume_element()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::invalid(format!("cannot normalize a state of norm {norm}")));
        }
        self.amplitudes.iter_mut().for_each(|z| *z /= norm);
        Ok(())
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Complex conjugate (time reversal for a real potential).
    pub fn conjugate(&self) -> WaveFunction {
        WaveFunction {
            grid: Arc::clone(&self.grid),
            amplitudes: self.amplitudes.iter().map(|z| z.conj()).collect(),
            time: self.time,
        }
    }

    /// `‖Ψ − Φ‖` with the `dx^N` measure.
    pub fn l2_distance(&self, other: &WaveFunction) -> f64 {
        let sum: f64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        (sum * self.grid.volume_element()).sqrt()
    }

    /// `⟨self|other⟩` with the `dx^N` measure.
    pub fn inner(&self, other: &WaveFunction) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.volume_element()
    }

    /// `max|Ψ(…x_a…x_b…) + Ψ(…x_b…x_a…)| / max|Ψ|`; zero for a state
    /// antisymmetric under exchange of axes `a` and `b`.
    pub fn antisymmetry_residual(&self, a: usize, b: usize) -> Result<f64> {
        self.grid.check_axis(a)?;
        self.grid.check_axis(b)?;
        let peak = self.amplitudes.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if peak == 0.0 || a == b {
            return Ok(0.0);
        }
        let worst = (0..self.amplitudes.len())
            .map(|i| (self.amplitudes[i] + self.amplitudes[self.grid.swapped_index(i, a, b)]).norm())
            .fold(0.0, f64::max);
        Ok(worst / peak)
    }

    /// Largest [`antisymmetry_residual`](Self::antisymmetry_residual) over
    /// all particle pairs.
    pub fn max_antisymmetry_residual(&self) -> f64 {
        let n = self.n_particles();
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in a + 1..n {
                worst = worst.max(self.antisymmetry_residual(a, b).unwrap_or(f64::INFINITY));
            }
        }
        worst
    }
}

/// Permutations of `0..n` in minimal-change (Heap) order, each paired with
/// its sign. Consecutive permutations differ by one transposition, so the
/// parity flips at every step.
pub fn signed_permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    let mut out = vec![(perm.clone(), sign)];
    let mut counters = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            sign = -sign;
            out.push((perm.clone(), sign));
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    out
}

/// `Ψ(x) = C⁻¹ Σ_perm sign(perm) Π_j ψ_j(x_perm(j))`, normalized.
pub fn antisymmetrize(orbitals: &[Vec<Complex64>], grid: Arc<GridSpec>) -> Result<WaveFunction> {
    check_orbitals(orbitals, &grid)?;
    let dx = grid.dx();
    for a in 0..orbitals.len() {
        for b in a + 1..orbitals.len() {
            let na = norm1(&orbitals[a], dx);
            let nb = norm1(&orbitals[b], dx);
            let overlap: Complex64 = orbitals[a]
                .iter()
                .zip(&orbitals[b])
                .map(|(x, y)| x.conj() * y)
                .sum::<Complex64>()
                * dx;
            if overlap.norm() / (na * nb) >= 1.0 - 1e-12 {
                return Err(Error::LinearlyDependentOrbitals { norm: 0.0 });
            }
        }
    }

    let perms = signed_permutations(orbitals.len());
    let n = orbitals.len();
    let mut amplitudes = vec![Complex64::default(); grid.len()];
    let mut idx = vec![0usize; n];
    for (flat, out) in amplitudes.iter_mut().enumerate() {
        let mut rest = flat;
        for slot in idx.iter_mut().rev() {
            *slot = rest % grid.points();
            rest /= grid.points();
        }
        let mut acc = Complex64::default();
        for (perm, sign) in &perms {
            // orbital j occupies coordinate perm[j]
            let term: Complex64 = (0..n).map(|j| orbitals[j][idx[perm[j]]]).product();
            acc += term * *sign;
        }
        *out = acc;
    }
    let mut psi = WaveFunction::new(grid, amplitudes, 0.0)?;
    let norm = psi.norm();
    if norm < 1e-12 {
        return Err(Error::LinearlyDependentOrbitals { norm });
    }
    psi.normalize()?;
    Ok(psi)
}

/// Distinguishable product `Π_j ψ_j(x_j)` without exchange symmetry.
pub fn separable_product(orbitals: &[Vec<Complex64>], grid: Arc<GridSpec>) -> Result<WaveFunction> {
    check_orbitals(orbitals, &grid)?;
    let amplitudes = (0..grid.len())
        .map(|flat| {
            grid.unravel(flat)
                .iter()
                .zip(orbitals)
                .map(|(&i, orb)| orb[i])
                .product()
        })
        .collect();
    let mut psi = WaveFunction::new(grid, amplitudes, 0.0)?;
    psi.normalize()?;
    Ok(psi)
}

fn check_orbitals(orbitals: &[Vec<Complex64>], grid: &GridSpec) -> Result<()> {
    if orbitals.len() != grid.n_particles() {
        return Err(Error::invalid(format!(
            "{} orbitals for {} particles",
            orbitals.len(),
            grid.n_particles()
        )));
    }
    if let Some(bad) = orbitals.iter().find(|o| o.len() != grid.points()) {
        return Err(Error::invalid(format!(
            "orbital of length {} on an axis of {} points",
            bad.len(),
            grid.points()
        )));
    }
    Ok(())
}

fn norm1(orbital: &[Complex64], dx: f64) -> f64 {
    (orbital.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx).sqrt()
}

/// One-body position density `P^k(x)`: `|Ψ|²` integrated over every axis
/// except `keep_axis`.
pub fn marginal_position_density(psi: &WaveFunction, keep_axis: usize) -> Result<Vec<f64>> {
    let grid = psi.grid();
    grid.check_axis(keep_axis)?;
    Ok(marginal_of_density(grid, &psi.density(), keep_axis))
}

pub(crate) fn marginal_of_density(grid: &GridSpec, density: &[f64], keep_axis: usize) -> Vec<f64> {
    let measure = grid.dx().powi(grid.n_particles() as i32 - 1);
    let mut out = grid.reduce_to_axis(density, keep_axis);
    out.iter_mut().for_each(|v| *v *= measure);
    out
}

/// One-body momentum density, in FFT order of [`GridSpec::wavenumbers`].
pub fn marginal_momentum_density(psi: &WaveFunction, keep_axis: usize) -> Result<Vec<f64>> {
    let grid = psi.grid();
    grid.check_axis(keep_axis)?;
    let phi = grid::to_momentum(grid, psi.amplitudes());
    let density: Vec<f64> = phi.iter().map(|z| z.norm_sqr()).collect();
    let measure = grid.dk().powi(grid.n_particles() as i32 - 1);
    let mut out = grid.reduce_to_axis(&density, keep_axis);
    out.iter_mut().for_each(|v| *v *= measure);
    Ok(out)
}

/// Reorders an FFT-ordered array so that wavenumbers ascend, returning the
/// sorted `(k, value)` pairs.
pub fn sorted_by_wavenumber(grid: &GridSpec, values: &[f64]) -> Vec<(f64, f64)> {
    let m = grid.points();
    (0..m)
        .map(|i| (i + m / 2) % m)
        .map(|i| (grid.wavenumbers()[i], values[i]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1() -> Arc<GridSpec> {
        GridSpec::new(1, 1024, 30.0).unwrap().shared()
    }

    #[test]
    fn resting_orbital_is_real_positive_and_peaked_at_center() {
        let g = grid1();
        let o = gaussian_orbital(&OrbitalSpec::new(0.0, 0.0, 1.0), &g).unwrap();
        assert!(o.iter().all(|z| z.im == 0.0 && z.re >= 0.0));
        let imax = (0..o.len()).max_by(|&a, &b| o[a].re.total_cmp(&o[b].re)).unwrap();
        assert_eq!(g.positions()[imax], 0.0);
        let n: f64 = o.iter().map(|z| z.norm_sqr()).sum::<f64>() * g.dx();
        assert!((n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn boost_changes_phase_not_density() {
        let g = grid1();
        let rest = gaussian_orbital(&OrbitalSpec::new(0.0, 0.0, 1.0), &g).unwrap();
        let moving = gaussian_orbital(&OrbitalSpec::new(0.0, 20.0, 1.0), &g).unwrap();
        for (a, b) in rest.iter().zip(&moving) {
            assert!((a.norm_sqr() - b.norm_sqr()).abs() < 1e-15);
        }
        // phase gradient is the boost near the center
        let i0 = g.nearest_index(0.0);
        let dphase = (moving[i0 + 1] / moving[i0]).arg() / g.dx();
        assert!((dphase - 20.0).abs() < 1e-9);
    }

    #[test]
    fn orbitals_that_leave_the_box_are_rejected() {
        let g = GridSpec::new(1, 64, 5.0).unwrap();
        assert!(gaussian_orbital(&OrbitalSpec::new(3.0, 0.0, 1.0), &g).is_err());
        assert!(gaussian_orbital(&OrbitalSpec::new(0.0, 0.0, 0.0), &g).is_err());
        // fits the 4σ rule but still carries tail mass at the edge
        let g = GridSpec::new(1, 64, 4.3).unwrap();
        assert!(matches!(
            gaussian_orbital(&OrbitalSpec::new(0.0, 0.0, 1.0), &g),
            Err(Error::StateExceedsBox { .. })
        ));
    }

    #[test]
    fn heap_permutations_have_correct_parity() {
        for n in 1..=4 {
            let perms = signed_permutations(n);
            let count: usize = (1..=n).product();
            assert_eq!(perms.len(), count);
            let mut seen = std::collections::HashSet::new();
            for (p, s) in &perms {
                assert!(seen.insert(p.clone()));
                // parity by counting inversions
                let inversions = (0..n)
                    .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                    .filter(|&(i, j)| p[i] > p[j])
                    .count();
                let expected = if inversions % 2 == 0 { 1.0 } else { -1.0 };
                assert_eq!(*s, expected, "{p:?}");
            }
        }
    }

    #[test]
    fn single_orbital_is_unchanged() {
        let g = grid1();
        let o = gaussian_orbital(&OrbitalSpec::new(0.0, 20.0, 1.0), &g).unwrap();
        let psi = antisymmetrize(&[o.clone()], g).unwrap();
        for (a, b) in psi.amplitudes().iter().zip(&o) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn two_fermions_vanish_on_the_diagonal() {
        let g = GridSpec::new(2, 128, 15.0).unwrap().shared();
        let a = gaussian_orbital(&OrbitalSpec::new(-4.0, 20.0, 1.0), &g).unwrap();
        let b = gaussian_orbital(&OrbitalSpec::new(0.0, 20.0, 1.0), &g).unwrap();
        let psi = antisymmetrize(&[a.clone(), b.clone()], Arc::clone(&g)).unwrap();
        assert!((psi.norm_squared() - 1.0).abs() < 1e-12);
        for i in 0..g.points() {
            assert_eq!(psi.amplitudes()[g.ravel(&[i, i])], Complex64::default());
        }
        // proportional to a(x1)b(x2) - b(x1)a(x2)
        let (i, j) = (g.nearest_index(-4.0), g.nearest_index(0.5));
        let raw = a[i] * b[j] - b[i] * a[j];
        let ratio = psi.amplitudes()[g.ravel(&[i, j])] / raw;
        let (i2, j2) = (g.nearest_index(-3.0), g.nearest_index(1.0));
        let raw2 = a[i2] * b[j2] - b[i2] * a[j2];
        assert!((psi.amplitudes()[g.ravel(&[i2, j2])] / raw2 - ratio).norm() < 1e-10);
    }

    #[test]
    fn three_fermions_are_antisymmetric_under_every_transposition() {
        let g = GridSpec::new(3, 64, 12.0).unwrap().shared();
        let orbs: Vec<_> = [-4.0, 0.0, 4.0]
            .iter()
            .map(|&c| gaussian_orbital(&OrbitalSpec::new(c, 3.0, 1.0), &g).unwrap())
            .collect();
        let psi = antisymmetrize(&orbs, g).unwrap();
        assert!((psi.norm_squared() - 1.0).abs() < 1e-12);
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            assert!(psi.antisymmetry_residual(a, b).unwrap() < 1e-12);
        }
    }

    #[test]
    fn identical_orbitals_are_rejected() {
        let g = GridSpec::new(2, 64, 10.0).unwrap().shared();
        let a = gaussian_orbital(&OrbitalSpec::new(0.0, 1.0, 1.0), &g).unwrap();
        assert!(matches!(
            antisymmetrize(&[a.clone(), a], g),
            Err(Error::LinearlyDependentOrbitals { .. })
        ));
    }

    #[test]
    fn marginals() {
        let g = GridSpec::new(2, 128, 15.0).unwrap().shared();
        let a = gaussian_orbital(&OrbitalSpec::new(-4.0, 2.0, 1.0), &g).unwrap();
        let b = gaussian_orbital(&OrbitalSpec::new(1.0, -1.0, 1.5), &g).unwrap();

        let product = separable_product(&[a.clone(), b.clone()], Arc::clone(&g)).unwrap();
        let p0 = marginal_position_density(&product, 0).unwrap();
        let p1 = marginal_position_density(&product, 1).unwrap();
        for i in 0..g.points() {
            assert!((p0[i] - a[i].norm_sqr()).abs() < 1e-14);
            assert!((p1[i] - b[i].norm_sqr()).abs() < 1e-14);
        }

        let fermions = antisymmetrize(&[a, b], Arc::clone(&g)).unwrap();
        let f0 = marginal_position_density(&fermions, 0).unwrap();
        let f1 = marginal_position_density(&fermions, 1).unwrap();
        let total: f64 = f0.iter().sum::<f64>() * g.dx();
        assert!((total - 1.0).abs() < 1e-10);
        assert!(f0.iter().all(|&v| v >= 0.0));
        for (x, y) in f0.iter().zip(&f1) {
            assert!((x - y).abs() < 1e-14);
        }
        assert!(marginal_position_density(&fermions, 2).is_err());
    }

    #[test]
    fn momentum_marginals() {
        let g = grid1();
        let boosted = WaveFunction::from_orbital(
            Arc::clone(&g),
            gaussian_orbital(&OrbitalSpec::new(0.0, 20.0, 1.0), &g).unwrap(),
        );
        let pm = marginal_momentum_density(&boosted, 0).unwrap();
        let sorted = sorted_by_wavenumber(&g, &pm);
        let peak = sorted.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        assert!((peak.0 - 20.0).abs() <= g.dk() / 2.0);
        assert!((pm.iter().sum::<f64>() * g.dk() - 1.0).abs() < 1e-10);

        let real = WaveFunction::from_orbital(
            Arc::clone(&g),
            gaussian_orbital(&OrbitalSpec::new(3.0, 0.0, 1.0), &g).unwrap(),
        );
        let pm = marginal_momentum_density(&real, 0).unwrap();
        let m = g.points();
        for i in 1..m / 2 {
            assert!((pm[i] - pm[m - i]).abs() < 1e-14);
        }
    }
}
