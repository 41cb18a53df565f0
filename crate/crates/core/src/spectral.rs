//! Grid diagonalization and the energy representation of a state.
//!
//! The Hamiltonian matrix uses the spectral kinetic operator of the
//! propagator, `T_ab = t(a − b)` with `t(d) = M⁻¹ Σ_k (k²/2) cos(k d dx)`,
//! so eigenstate evolution and split-operator evolution solve the same
//! discrete problem.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, Fourier, GridSpec};
use crate::hamiltonian::HamiltonianTerms;
use crate::state::WaveFunction;

/// Largest dense matrix dimension accepted by [`diagonalize`].
pub const MAX_DENSE_DIMENSION: usize = 4096;
/// Largest axis for two-particle diagonalization.
pub const MAX_TWO_PARTICLE_POINTS: usize = 64;
/// Projection completeness below which a warning is logged.
pub const COMPLETENESS_WARNING: f64 = 0.999;

/// Referent of the 10%-of-peak rule in [`count_activated`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationRule {
    /// `|c_n| ≥ f·max|c_n|`, i.e. `|ρ_{n,peak}|` against `|ρ_{peak,peak}|`.
    #[default]
    Amplitude,
    /// `|c_n|² ≥ f·max|c_n|²`, the diagonal of `|ρ|`.
    Population,
}

/// Lowest eigenpairs of a grid Hamiltonian and, once projected, the
/// coefficients `c_n = ⟨R_n|Ψ(0)⟩`.
#[derive(Clone, Debug)]
pub struct EnergyBasis {
    grid: Arc<GridSpec>,
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<Vec<f64>>,
    coefficients: Vec<Complex64>,
}

/// `t(d)` for `d = 0..M`.
fn kinetic_kernel(grid: &GridSpec) -> Vec<f64> {
    let m = grid.points();
    let dx = grid.dx();
    (0..m)
        .map(|d| {
            grid.wavenumbers().iter().map(|k| 0.5 * k * k * (k * d as f64 * dx).cos()).sum::<f64>() / m as f64
        })
        .collect()
}

fn kernel_at(kernel: &[f64], a: usize, b: usize) -> f64 {
    kernel[a.abs_diff(b)]
}

/// Dense Hamiltonian matrix on the configuration grid.
pub fn hamiltonian_matrix(terms: &HamiltonianTerms) -> Result<DMatrix<f64>> {
    let grid = terms.grid();
    check_dense_budget(grid)?;
    let dim = grid.len();
    let kernel = kinetic_kernel(grid);
    let v = terms.total_potential();
    let m = grid.points();
    let h = match grid.n_particles() {
        1 => DMatrix::from_fn(dim, dim, |a, b| kernel_at(&kernel, a, b) + if a == b { v[a] } else { 0.0 }),
        2 => DMatrix::from_fn(dim, dim, |a, b| {
            let (a1, a2, b1, b2) = (a / m, a % m, b / m, b % m);
            let mut value = 0.0;
            if a2 == b2 {
                value += kernel_at(&kernel, a1, b1);
            }
            if a1 == b1 {
                value += kernel_at(&kernel, a2, b2);
            }
            if a == b {
                value += v[a];
            }
            value
        }),
        n => return Err(Error::invalid(format!("dense diagonalization supports N <= 2, got {n}"))),
    };
    Ok(h)
}

fn check_dense_budget(grid: &GridSpec) -> Result<()> {
    let dim = grid.len();
    let too_wide = grid.n_particles() == 2 && grid.points() > MAX_TWO_PARTICLE_POINTS;
    if dim > MAX_DENSE_DIMENSION || too_wide || grid.n_particles() > 2 {
        return Err(Error::BudgetExceeded {
            requested: (dim as u128).pow(2) * 8,
            budget: (MAX_DENSE_DIMENSION as u128).pow(2) * 8,
        });
    }
    Ok(())
}

/// Lowest `n_states` eigenpairs, ascending, with eigenvectors orthonormal
/// under the `dx^N` quadrature and gauge-fixed so that the component of
/// largest magnitude is positive.
pub fn diagonalize(terms: &HamiltonianTerms, n_states: usize) -> Result<EnergyBasis> {
    let grid = Arc::clone(terms.grid());
    let h = hamiltonian_matrix(terms)?;
    let dim = h.nrows();
    if n_states == 0 || n_states > dim {
        return Err(Error::invalid(format!("n_states must be in 1..={dim}, got {n_states}")));
    }
    let eigen = SymmetricEigen::try_new(h, 1e-15, 0)
        .ok_or_else(|| Error::NonConvergence("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]));
    let scale = 1.0 / grid.volume_element().sqrt();
    let mut eigenvalues = Vec::with_capacity(n_states);
    let mut eigenvectors = Vec::with_capacity(n_states);
    for &col in order.iter().take(n_states) {
        let mut v: Vec<f64> = eigen.eigenvectors.column(col).iter().map(|c| c * scale).collect();
        let pivot = v.iter().copied().fold(0.0_f64, |best, c| if c.abs() > best.abs() { c } else { best });
        if pivot < 0.0 {
            v.iter_mut().for_each(|c| *c = -*c);
        }
        eigenvalues.push(eigen.eigenvalues[col]);
        eigenvectors.push(v);
    }
    Ok(EnergyBasis { grid, eigenvalues, eigenvectors, coefficients: Vec::new() })
}

impl EnergyBasis {
    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, n: usize) -> Result<&[f64]> {
        self.eigenvectors
            .get(n)
            .map(Vec::as_slice)
            .ok_or(Error::IndexOutOfRange { index: n, len: self.dimension() })
    }

    /// Eigenvector `n` as a state at `t = 0`.
    pub fn eigenstate(&self, n: usize) -> Result<WaveFunction> {
        let amps = self.eigenvector(n)?.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        WaveFunction::new(Arc::clone(&self.grid), amps, 0.0)
    }

    /// Empty until [`EnergyBasis::projected`] or
    /// [`EnergyBasis::set_coefficients`].
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn set_coefficients(&mut self, coefficients: Vec<Complex64>) -> Result<()> {
        if coefficients.len() != self.dimension() {
            return Err(Error::invalid("coefficient count differs from basis dimension"));
        }
        self.coefficients = coefficients;
        Ok(())
    }

    /// Projects `psi0` and stores the coefficients.
    pub fn projected(mut self, psi0: &WaveFunction) -> Result<Self> {
        self.coefficients = project(psi0, &self)?;
        Ok(self)
    }

    /// `ρ_{n,n} = |c_n|²`.
    pub fn populations(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.norm_sqr()).collect()
    }

    /// `Σ|c_n|²`.
    pub fn completeness(&self) -> f64 {
        self.populations().iter().sum()
    }

    /// Largest `|⟨R_n|R_m⟩ − δ_nm|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let dv = self.grid.volume_element();
        let mut worst = 0.0_f64;
        for (n, a) in self.eigenvectors.iter().enumerate() {
            for (m, b) in self.eigenvectors.iter().enumerate().skip(n) {
                let overlap: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * dv;
                let target = if n == m { 1.0 } else { 0.0 };
                worst = worst.max((overlap - target).abs());
            }
        }
        worst
    }

    /// `max_x |H R_n − E_n R_n|`, with `H` applied by FFT rather than by the
    /// dense matrix.
    pub fn eigen_residual(&self, terms: &HamiltonianTerms, n: usize) -> Result<f64> {
        let r = self.eigenvector(n)?;
        let grid = &self.grid;
        let mut hr: Vec<Complex64> = r.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let factor: Vec<Complex64> =
            grid.wavenumbers().iter().map(|k| Complex64::new(0.5 * k * k, 0.0)).collect();
        let mut fourier = Fourier::for_grid(grid);
        let mut kinetic = vec![Complex64::default(); hr.len()];
        for axis in 0..grid.n_particles() {
            let mut part = hr.clone();
            fourier.filter_axis(grid, &mut part, axis, &factor);
            kinetic.iter_mut().zip(&part).for_each(|(k, p)| *k += p);
        }
        for (((h, k), v), rv) in hr.iter_mut().zip(&kinetic).zip(terms.total_potential()).zip(r) {
            *h = k + v * rv - self.eigenvalues[n] * rv;
        }
        Ok(hr.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    fn require_coefficients(&self) -> Result<()> {
        if self.coefficients.is_empty() {
            return Err(Error::invalid("basis has no projection coefficients"));
        }
        let completeness = self.completeness();
        if completeness < COMPLETENESS_WARNING {
            log::warn!("truncated basis: Σ|c_n|² = {completeness:.6}");
        }
        Ok(())
    }

    fn require_single_particle(&self) -> Result<()> {
        if self.grid.n_particles() != 1 {
            return Err(Error::invalid("operation defined for N = 1 bases"));
        }
        Ok(())
    }

    /// `Σ_n ρ_{n,n} ⟨R_n|A|R_n⟩` for a diagonal observable `A(x)` given on
    /// the configuration grid.
    pub fn diagonal_ensemble(&self, observable: &[f64]) -> Result<f64> {
        self.require_coefficients()?;
        let dv = self.grid.volume_element();
        Ok(self
            .eigenvectors
            .iter()
            .zip(self.populations())
            .map(|(r, p)| p * r.iter().zip(observable).map(|(x, a)| x * x * a).sum::<f64>() * dv)
            .sum())
    }
}

/// `c_n = Σ R_n(x) Ψ(x) dx^N`. Logs a warning if `Σ|c_n|² < 0.999`.
pub fn project(psi0: &WaveFunction, basis: &EnergyBasis) -> Result<Vec<Complex64>> {
    if **psi0.grid() != *basis.grid {
        return Err(Error::invalid("state and basis live on different grids"));
    }
    let dv = basis.grid.volume_element();
    let c: Vec<Complex64> = basis
        .eigenvectors
        .iter()
        .map(|r| r.iter().zip(psi0.amplitudes()).map(|(a, z)| z * *a).sum::<Complex64>() * dv)
        .collect();
    let completeness: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    if completeness < COMPLETENESS_WARNING {
        log::warn!("incomplete basis: Σ|c_n|² = {completeness:.6}");
    }
    Ok(c)
}

/// Number of states whose weight reaches `threshold_fraction` of the peak,
/// with the weight chosen by `rule`.
pub fn count_activated(coefficients: &[Complex64], threshold_fraction: f64, rule: ActivationRule) -> Result<usize> {
    if coefficients.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let weight = |c: &Complex64| match rule {
        ActivationRule::Amplitude => c.norm(),
        ActivationRule::Population => c.norm_sqr(),
    };
    let peak = coefficients.iter().map(weight).fold(0.0, f64::max);
    Ok(coefficients.iter().filter(|c| weight(c) >= threshold_fraction * peak).count())
}

/// `ρ_{n,m}(t) = c_n c_m* exp(i(E_m − E_n)t)`.
pub fn coherence(basis: &EnergyBasis, n: usize, m: usize, t: f64) -> Result<Complex64> {
    basis.require_coefficients()?;
    let len = basis.dimension();
    for index in [n, m] {
        if index >= len {
            return Err(Error::IndexOutOfRange { index, len });
        }
    }
    let c = &basis.coefficients;
    let e = &basis.eigenvalues;
    Ok(c[n] * c[m].conj() * Complex64::from_polar(1.0, (e[m] - e[n]) * t))
}

/// `Σ_n c_n R_n e^{−iE_n t}`.
pub fn reconstruct_state(basis: &EnergyBasis, t: f64) -> Result<WaveFunction> {
    basis.require_coefficients()?;
    let mut amps = vec![Complex64::default(); basis.grid.len()];
    for ((r, c), e) in basis.eigenvectors.iter().zip(&basis.coefficients).zip(&basis.eigenvalues) {
        let w = c * Complex64::from_polar(1.0, -e * t);
        amps.iter_mut().zip(r).for_each(|(a, &x)| *a += w * x);
    }
    WaveFunction::new(Arc::clone(&basis.grid), amps, t)
}

/// Diagonal and off-diagonal parts of density and current at one time.
#[derive(Clone, Debug)]
pub struct DensityCurrentSplit {
    pub time: f64,
    /// `Σ_n ρ_{n,n} R_n²`.
    pub density_diagonal: Vec<f64>,
    /// `Σ_{n≠m} ρ_{n,m}(t) R_n R_m`.
    pub density_off: Vec<f64>,
    /// `Σ_n Im(ρ_{n,n}) R_n R_n'`, identically zero.
    pub current_diagonal: Vec<f64>,
    /// `Σ_{n<m} Im(ρ_{m,n}(t)) (R_n R_m' − R_m R_n')`.
    pub current_off: Vec<f64>,
}

/// Precomputed eigenvector derivatives for repeated decompositions.
pub struct Decomposer<'a> {
    basis: &'a EnergyBasis,
    derivatives: Vec<Vec<f64>>,
    second_derivatives: Vec<Vec<f64>>,
    active: Vec<usize>,
}

impl<'a> Decomposer<'a> {
    pub fn new(basis: &'a EnergyBasis) -> Result<Self> {
        basis.require_single_particle()?;
        basis.require_coefficients()?;
        let grid = &basis.grid;
        let mut fourier = Fourier::for_grid(grid);
        let mut derivatives = Vec::with_capacity(basis.dimension());
        let mut second_derivatives = Vec::with_capacity(basis.dimension());
        for r in &basis.eigenvectors {
            let mut z: Vec<Complex64> = r.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            grid::derivative_in_place(grid, &mut fourier, &mut z, 0);
            derivatives.push(z.iter().map(|v| v.re).collect());
            grid::derivative_in_place(grid, &mut fourier, &mut z, 0);
            second_derivatives.push(z.iter().map(|v| v.re).collect());
        }
        let active = (0..basis.dimension()).filter(|&n| basis.coefficients[n] != Complex64::default()).collect();
        Ok(Decomposer { basis, derivatives, second_derivatives, active })
    }

    fn rho(&self, n: usize, m: usize, t: f64) -> Complex64 {
        let c = &self.basis.coefficients;
        let e = &self.basis.eigenvalues;
        c[n] * c[m].conj() * Complex64::from_polar(1.0, (e[m] - e[n]) * t)
    }

    /// Off-diagonal density only.
    pub fn density_off(&self, t: f64) -> Vec<f64> {
        let r = &self.basis.eigenvectors;
        let mut out = vec![0.0; self.basis.grid.points()];
        for (a, &n) in self.active.iter().enumerate() {
            for &m in &self.active[a + 1..] {
                let w = 2.0 * self.rho(n, m, t).re;
                out.iter_mut().zip(r[n].iter().zip(&r[m])).for_each(|(o, (x, y))| *o += w * x * y);
            }
        }
        out
    }

    /// Off-diagonal current only.
    pub fn current_off(&self, t: f64) -> Vec<f64> {
        let r = &self.basis.eigenvectors;
        let d = &self.derivatives;
        let mut out = vec![0.0; self.basis.grid.points()];
        for (a, &n) in self.active.iter().enumerate() {
            for &m in &self.active[a + 1..] {
                let w = self.rho(m, n, t).im;
                for (i, o) in out.iter_mut().enumerate() {
                    *o += w * (r[n][i] * d[m][i] - r[m][i] * d[n][i]);
                }
            }
        }
        out
    }

    /// `∂ₓJ_off`, expanded by the product rule into
    /// `Σ_{n<m} Im(ρ_{m,n}(t)) (R_n R_m'' − R_m R_n'')`. Differentiating the
    /// sampled current instead would alias, since the products of the upper
    /// eigenstates are not band-limited on the grid.
    pub fn current_off_divergence(&self, t: f64) -> Vec<f64> {
        let r = &self.basis.eigenvectors;
        let d2 = &self.second_derivatives;
        let mut out = vec![0.0; self.basis.grid.points()];
        for (a, &n) in self.active.iter().enumerate() {
            for &m in &self.active[a + 1..] {
                let w = self.rho(m, n, t).im;
                for (i, o) in out.iter_mut().enumerate() {
                    *o += w * (r[n][i] * d2[m][i] - r[m][i] * d2[n][i]);
                }
            }
        }
        out
    }

    pub fn split(&self, t: f64) -> DensityCurrentSplit {
        let r = &self.basis.eigenvectors;
        let points = self.basis.grid.points();
        let mut density_diagonal = vec![0.0; points];
        let mut current_diagonal = vec![0.0; points];
        for &n in &self.active {
            let rho = self.rho(n, n, t);
            for i in 0..points {
                density_diagonal[i] += rho.re * r[n][i] * r[n][i];
                current_diagonal[i] += rho.im * r[n][i] * self.derivatives[n][i];
            }
        }
        DensityCurrentSplit {
            time: t,
            density_diagonal,
            density_off: self.density_off(t),
            current_diagonal,
            current_off: self.current_off(t),
        }
    }

    /// `max_x |∂_t|Ψ_off|² + ∂_x J_off|`, with a five-point time derivative
    /// of step `h` and [`Self::current_off_divergence`].
    pub fn continuity_residual(&self, t: f64, h: f64) -> Result<f64> {
        if !(h > 0.0) {
            return Err(Error::invalid("finite-difference step must be positive"));
        }
        let f = |s: f64| self.density_off(s);
        let (m2, m1, p1, p2) = (f(t - 2.0 * h), f(t - h), f(t + h), f(t + 2.0 * h));
        let dj = self.current_off_divergence(t);
        Ok((0..dj.len())
            .map(|i| {
                let dt = (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * h);
                (dt + dj[i]).abs()
            })
            .fold(0.0, f64::max))
    }
}

/// One-shot [`Decomposer::split`].
pub fn decompose_density_current(basis: &EnergyBasis, t: f64) -> Result<DensityCurrentSplit> {
    Ok(Decomposer::new(basis)?.split(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_terms, sample_disorder, DisorderField};
    use crate::state::{gaussian_orbital, OrbitalSpec};

    fn trap(g: &Arc<GridSpec>) -> HamiltonianTerms {
        build_terms(Arc::clone(g), 1.0, 0.5, DisorderField::none(g)).unwrap()
    }

    #[test]
    fn kernel_matches_fft_kinetic_operator() {
        let g = GridSpec::new(1, 32, 6.0).unwrap().shared();
        let h = hamiltonian_matrix(&trap(&g)).unwrap();
        let basis = diagonalize(&trap(&g), 5).unwrap();
        for n in 0..5 {
            assert!(basis.eigen_residual(&trap(&g), n).unwrap() < 1e-9);
        }
        assert!((h[(0, 1)] - h[(1, 0)]).abs() < 1e-15);
    }

    #[test]
    fn harmonic_levels_and_orthonormality() {
        let g = GridSpec::new(1, 128, 10.0).unwrap().shared();
        let basis = diagonalize(&trap(&g), 20).unwrap();
        for (n, e) in basis.eigenvalues().iter().enumerate() {
            assert!((e - (n as f64 + 0.5)).abs() < 1e-8, "E_{n} = {e}");
        }
        assert!(basis.orthonormality_residual() < 1e-8);
        let ground = basis.eigenvector(0).unwrap();
        assert!(ground.iter().all(|&v| v > -1e-12));
    }

    #[test]
    fn projection_of_an_eigenstate_is_a_delta() {
        let g = GridSpec::new(1, 128, 10.0).unwrap().shared();
        let d = sample_disorder(&g, 2.0, 1.0, 5).unwrap();
        let terms = build_terms(Arc::clone(&g), 1.0, 0.5, d).unwrap();
        let basis = diagonalize(&terms, 30).unwrap();
        let psi = basis.eigenstate(5).unwrap();
        let basis = basis.projected(&psi).unwrap();
        for (n, c) in basis.coefficients().iter().enumerate() {
            let target = if n == 5 { 1.0 } else { 0.0 };
            assert!((c.norm() - target).abs() < 1e-10);
        }
        assert_eq!(count_activated(basis.coefficients(), 0.1, ActivationRule::Amplitude).unwrap(), 1);
        let rebuilt = reconstruct_state(&basis, 3.0).unwrap();
        let d0 = psi.density();
        for (a, b) in rebuilt.density().iter().zip(&d0) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn activation_rules() {
        let flat = vec![Complex64::new(0.3, 0.0); 10];
        assert_eq!(count_activated(&flat, 0.1, ActivationRule::Amplitude).unwrap(), 10);
        let c = vec![Complex64::new(1.0, 0.0), Complex64::new(0.2, 0.0), Complex64::new(0.05, 0.0)];
        assert_eq!(count_activated(&c, 0.1, ActivationRule::Amplitude).unwrap(), 2);
        assert_eq!(count_activated(&c, 0.1, ActivationRule::Population).unwrap(), 1);
        assert!(count_activated(&[], 0.1, ActivationRule::Amplitude).is_err());
    }

    #[test]
    fn coherence_modulus_is_constant() {
        let g = GridSpec::new(1, 128, 12.0).unwrap().shared();
        let psi = WaveFunction::from_orbital(
            Arc::clone(&g),
            gaussian_orbital(&OrbitalSpec::new(1.0, 2.0, 1.0), &g).unwrap(),
        );
        let basis = diagonalize(&trap(&g), 40).unwrap().projected(&psi).unwrap();
        assert!((basis.completeness() - 1.0).abs() < 1e-8);
        let a = coherence(&basis, 2, 4, 0.0).unwrap();
        let b = coherence(&basis, 2, 4, 100.0).unwrap();
        assert!((a.norm() - b.norm()).abs() < 1e-12);
        let diag = coherence(&basis, 3, 3, 7.0).unwrap();
        assert!((diag.re - basis.coefficients()[3].norm_sqr()).abs() < 1e-15);
        assert!(matches!(coherence(&basis, 3, 40, 0.0), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn density_split_is_exact_and_continuity_holds() {
        let g = GridSpec::new(1, 128, 12.0).unwrap().shared();
        let d = sample_disorder(&g, 2.0, 1.0, 9).unwrap();
        let terms = build_terms(Arc::clone(&g), 1.0, 0.5, d).unwrap();
        let psi = WaveFunction::from_orbital(
            Arc::clone(&g),
            gaussian_orbital(&OrbitalSpec::new(0.0, 3.0, 1.0), &g).unwrap(),
        );
        let basis = diagonalize(&terms, 60).unwrap().projected(&psi).unwrap();
        let dec = Decomposer::new(&basis).unwrap();
        let t = 2.5;
        let split = dec.split(t);
        let full = reconstruct_state(&basis, t).unwrap().density();
        for i in 0..g.points() {
            assert!((split.density_diagonal[i] + split.density_off[i] - full[i]).abs() < 1e-10);
            assert_eq!(split.current_diagonal[i], 0.0);
        }
        let r = dec.continuity_residual(t, 1e-3).unwrap();
        assert!(r < 1e-4, "{r}");
    }

    #[test]
    fn divergence_matches_the_sampled_current_for_low_states() {
        let g = GridSpec::new(1, 128, 12.0).unwrap().shared();
        let psi = WaveFunction::from_orbital(
            Arc::clone(&g),
            gaussian_orbital(&OrbitalSpec::new(0.5, 1.0, 1.0), &g).unwrap(),
        );
        let basis = diagonalize(&trap(&g), 15).unwrap().projected(&psi).unwrap();
        let dec = Decomposer::new(&basis).unwrap();
        let j: Vec<Complex64> = dec.current_off(1.3).iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let sampled = grid::spectral_derivative(&g, &j, 0).unwrap();
        let expanded = dec.current_off_divergence(1.3);
        for (a, b) in sampled.iter().zip(&expanded) {
            assert!((a.re - b).abs() < 1e-10);
        }
    }

    #[test]
    fn two_particle_toy_grid() {
        let g = GridSpec::new(2, 16, 5.0).unwrap().shared();
        let terms = build_terms(Arc::clone(&g), 1.0, 0.5, DisorderField::none(&g)).unwrap();
        let basis = diagonalize(&terms, 6).unwrap();
        assert!(basis.orthonormality_residual() < 1e-8);
        assert!(basis.eigen_residual(&terms, 3).unwrap() < 1e-8);
        let wide = GridSpec::new(2, 128, 5.0).unwrap().shared();
        let terms = build_terms(Arc::clone(&wide), 1.0, 0.5, DisorderField::none(&wide)).unwrap();
        assert!(matches!(diagonalize(&terms, 4), Err(Error::BudgetExceeded { .. })));
    }
}
