//! Expectation values and thermalization diagnostics.
//!
//! Momentum moments are taken in momentum space. First moments use the
//! derivative wavenumbers (Nyquist element zeroed) so that they agree with
//! `Re⟨Ψ|−i∂Ψ⟩` to rounding; second moments use the full `k²` of the
//! propagator so that the kinetic energy is the conserved one.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, Fourier, GridSpec};
use crate::hamiltonian::HamiltonianTerms;
use crate::state::{marginal_of_density, WaveFunction};

/// Expectation values of one recorded state. Energies are totals over all
/// particles; divide by `N` for per-particle values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub time: f64,
    pub x_mean: Vec<f64>,
    pub p_mean: Vec<f64>,
    pub x_rms: Vec<f64>,
    pub p_rms: Vec<f64>,
    pub kinetic: f64,
    pub v_trap: f64,
    pub v_disorder: f64,
    pub v_coulomb: f64,
    pub total: f64,
}

impl ObservableRecord {
    pub fn n_particles(&self) -> usize {
        self.x_mean.len()
    }

    /// `⟨V_HO⟩ + ⟨V_D⟩ + ⟨V_Cou⟩`.
    pub fn potential(&self) -> f64 {
        self.v_trap + self.v_disorder + self.v_coulomb
    }
}

/// `⟨x_j⟩ = Σ x_j |Ψ|² dx^N`.
pub fn expect_position(psi: &WaveFunction, axis: usize) -> Result<f64> {
    let grid = psi.grid();
    grid.check_axis(axis)?;
    let marginal = marginal_of_density(grid, &psi.density(), axis);
    Ok(first_moment(grid.positions(), &marginal) * grid.dx())
}

/// `⟨p_j⟩` by quadrature of the momentum-space density.
pub fn expect_momentum(psi: &WaveFunction, axis: usize) -> Result<f64> {
    let grid = psi.grid();
    grid.check_axis(axis)?;
    let marginal = momentum_marginal(grid, &grid::to_momentum(grid, psi.amplitudes()), axis);
    Ok(first_moment(&derivative_wavenumbers(grid), &marginal) * grid.dk())
}

/// `⟨p_j⟩ = Re⟨Ψ|−i∂_jΨ⟩` with a spectral derivative.
pub fn expect_momentum_by_derivative(psi: &WaveFunction, axis: usize) -> Result<f64> {
    let grid = psi.grid();
    let d = grid::spectral_derivative(grid, psi.amplitudes(), axis)?;
    let sum: Complex64 = psi.amplitudes().iter().zip(&d).map(|(a, b)| a.conj() * b).sum();
    // Re(−i z) = Im z
    Ok(sum.im * grid.volume_element())
}

/// Largest difference between the two `⟨p_j⟩` routes over all axes.
pub fn momentum_route_gap(psi: &WaveFunction) -> Result<f64> {
    let mut gap = 0.0_f64;
    for axis in 0..psi.n_particles() {
        gap = gap.max((expect_momentum(psi, axis)? - expect_momentum_by_derivative(psi, axis)?).abs());
    }
    Ok(gap)
}

fn derivative_wavenumbers(grid: &GridSpec) -> Vec<f64> {
    (0..grid.points()).map(|i| grid.derivative_wavenumber(i)).collect()
}

fn first_moment(samples: &[f64], weights: &[f64]) -> f64 {
    samples.iter().zip(weights).map(|(s, w)| s * w).sum()
}

fn second_moment(samples: &[f64], weights: &[f64]) -> f64 {
    samples.iter().zip(weights).map(|(s, w)| s * s * w).sum()
}

fn momentum_marginal(grid: &GridSpec, phi: &[Complex64], axis: usize) -> Vec<f64> {
    let density: Vec<f64> = phi.iter().map(|z| z.norm_sqr()).collect();
    let mut out = grid.reduce_to_axis(&density, axis);
    let measure = grid.dk().powi(grid.n_particles() as i32 - 1);
    out.iter_mut().for_each(|v| *v *= measure);
    out
}

fn rms(mean: f64, mean_sq: f64) -> f64 {
    (mean_sq - mean * mean).max(0.0).sqrt()
}

/// Measures every field of an [`ObservableRecord`]. Reuses FFT plans and
/// buffers across calls.
pub struct Probe {
    fourier: Fourier,
    buffer: Vec<Complex64>,
}

impl Probe {
    pub fn new(grid: &GridSpec) -> Self {
        Probe { fourier: Fourier::for_grid(grid), buffer: Vec::new() }
    }

    pub fn measure(&mut self, psi: &WaveFunction, terms: &HamiltonianTerms) -> Result<ObservableRecord> {
        let grid = psi.grid();
        if **grid != **terms.grid() {
            return Err(Error::invalid("state and Hamiltonian live on different grids"));
        }
        let n = grid.n_particles();
        let (dx, dk) = (grid.dx(), grid.dk());
        let density = psi.density();

        self.buffer.clear();
        self.buffer.extend_from_slice(psi.amplitudes());
        grid::to_momentum_in_place(grid, &mut self.fourier, &mut self.buffer);

        let kd = derivative_wavenumbers(grid);
        let mut record = ObservableRecord {
            time: psi.time(),
            x_mean: Vec::with_capacity(n),
            p_mean: Vec::with_capacity(n),
            x_rms: Vec::with_capacity(n),
            p_rms: Vec::with_capacity(n),
            kinetic: 0.0,
            v_trap: 0.0,
            v_disorder: 0.0,
            v_coulomb: 0.0,
            total: 0.0,
        };
        for axis in 0..n {
            let px = marginal_of_density(grid, &density, axis);
            let x1 = first_moment(grid.positions(), &px) * dx;
            let x2 = second_moment(grid.positions(), &px) * dx;
            let pk = momentum_marginal(grid, &self.buffer, axis);
            let p1 = first_moment(&kd, &pk) * dk;
            let p2 = second_moment(grid.wavenumbers(), &pk) * dk;
            record.x_mean.push(x1);
            record.x_rms.push(rms(x1, x2));
            record.p_mean.push(p1);
            record.p_rms.push(rms(p1, p2));
            record.kinetic += 0.5 * p2;
            record.v_trap += first_moment(terms.trap_profile(), &px) * dx;
            record.v_disorder += first_moment(terms.disorder_profile(), &px) * dx;
        }
        if terms.coulomb_enabled() && n > 1 {
            record.v_coulomb = first_moment(terms.coulomb(), &density) * grid.volume_element();
        }
        record.total = record.kinetic + record.v_trap + record.v_disorder + record.v_coulomb;
        Ok(record)
    }
}

/// One-shot [`Probe::measure`].
pub fn energy_decomposition(psi: &WaveFunction, terms: &HamiltonianTerms) -> Result<ObservableRecord> {
    Probe::new(psi.grid()).measure(psi, terms)
}

/// `|⟨K⟩ − ⟨V⟩| / ⟨E⟩`.
pub fn virial_residual(record: &ObservableRecord) -> Result<f64> {
    if record.total == 0.0 {
        return Err(Error::DivisionByZero("total energy is zero"));
    }
    Ok((record.kinetic - record.potential()).abs() / record.total.abs())
}

/// Cumulative distribution of the classical microcanonical density with
/// turning point `a`.
fn classical_cdf(x: f64, a: f64) -> f64 {
    (x / a).clamp(-1.0, 1.0).asin() / PI + 0.5
}

/// Classical microcanonical harmonic-oscillator density
/// `[π l0 √(p0² − x²/l0²)]⁻¹` on the grid positions. Samples within two
/// spacings of a turning point carry the exact cell average instead of the
/// divergent point value; samples beyond are zero.
pub fn classical_microcanonical_density(grid: &GridSpec, l0: f64, p0: f64) -> Result<Vec<f64>> {
    if !(p0 > 0.0) || !(l0 > 0.0) {
        return Err(Error::invalid(format!("l0 and p0 must be positive, got {l0}, {p0}")));
    }
    let a = l0 * p0;
    let dx = grid.dx();
    Ok(grid
        .positions()
        .iter()
        .map(|&x| {
            if a - x.abs() > 2.0 * dx {
                1.0 / (PI * l0 * (p0 * p0 - x * x / (l0 * l0)).sqrt())
            } else {
                (classical_cdf(x + dx / 2.0, a) - classical_cdf(x - dx / 2.0, a)) / dx
            }
        })
        .collect())
}

/// `(⟨x_j⟩, ⟨p_j⟩)` pairs in record order.
pub fn phase_space_trace(records: &[ObservableRecord], axis: usize) -> Result<Vec<(f64, f64)>> {
    let first = records.first().ok_or(Error::EmptyWindow)?;
    if axis >= first.n_particles() {
        return Err(Error::AxisOutOfRange { axis, n_particles: first.n_particles() });
    }
    Ok(records.iter().map(|r| (r.x_mean[axis], r.p_mean[axis])).collect())
}

/// Trapezoid weights of the samples inside `[t0, t1]`, as `(index, weight)`
/// pairs. `times` must be ascending. Weights sum to the covered span.
pub fn trapezoid_weights(times: &[f64], t0: f64, t1: f64) -> Result<Vec<(usize, f64)>> {
    if !(t1 >= t0) {
        return Err(Error::invalid(format!("window [{t0}, {t1}] is reversed")));
    }
    let (first, last) = match (times.first(), times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::EmptyWindow),
    };
    let tol = 1e-9 * (1.0 + last.abs());
    if t0 < first - tol || t1 > last + tol {
        return Err(Error::invalid(format!(
            "window [{t0}, {t1}] leaves the recorded range [{first}, {last}]"
        )));
    }
    let inside: Vec<usize> =
        (0..times.len()).filter(|&i| times[i] >= t0 - tol && times[i] <= t1 + tol).collect();
    let mut weights: Vec<(usize, f64)> = inside.iter().map(|&i| (i, 0.0)).collect();
    for w in 0..inside.len().saturating_sub(1) {
        let h = times[inside[w + 1]] - times[inside[w]];
        weights[w].1 += h / 2.0;
        weights[w + 1].1 += h / 2.0;
    }
    Ok(weights)
}

/// Trapezoidal mean of `values` over `[t0, t1]`.
pub fn window_mean(times: &[f64], values: &[f64], t0: f64, t1: f64) -> Result<f64> {
    let weights = trapezoid_weights(times, t0, t1)?;
    let span: f64 = weights.iter().map(|w| w.1).sum();
    match weights.len() {
        0 => Err(Error::EmptyWindow),
        _ if span == 0.0 => Ok(values[weights[0].0]),
        _ => Ok(weights.iter().map(|&(i, w)| w * values[i]).sum::<f64>() / span),
    }
}

/// Sliding window used by [`equilibration_time`].
pub const EQUILIBRATION_WINDOW: f64 = 10.0;
/// Threshold on the window-averaged virial residual.
pub const EQUILIBRATION_THRESHOLD: f64 = 0.05;

/// Smallest recorded time `t` such that the mean of `residual` over
/// `[s, s + window]` stays below `threshold` for every recorded `s ≥ t`
/// whose window fits in the record. `None` if no such time exists.
pub fn equilibration_time(
    times: &[f64],
    residual: &[f64],
    window: f64,
    threshold: f64,
) -> Result<Option<f64>> {
    if times.len() != residual.len() {
        return Err(Error::invalid("times and residual differ in length"));
    }
    let last = match times.last() {
        Some(&t) => t,
        None => return Err(Error::EmptyWindow),
    };
    let mut estimate = None;
    for (i, &s) in times.iter().enumerate().rev() {
        if s + window > last + 1e-9 {
            continue;
        }
        if window_mean(times, residual, s, s + window)? < threshold {
            estimate = Some(times[i]);
        } else {
            break;
        }
    }
    Ok(estimate)
}

/// `max |P(x) − ρ_cl(x)|` over `|x| ≤ x_max`.
pub fn classical_deviation(grid: &GridSpec, density: &[f64], rho_cl: &[f64], x_max: f64) -> f64 {
    grid.positions()
        .iter()
        .zip(density.iter().zip(rho_cl))
        .filter(|(x, _)| x.abs() <= x_max)
        .map(|(_, (p, c))| (p - c).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_terms, sample_disorder, DisorderField};
    use crate::state::{antisymmetrize, gaussian_orbital, OrbitalSpec};
    use std::sync::Arc;

    fn grid1() -> Arc<GridSpec> {
        GridSpec::new(1, 1024, 30.0).unwrap().shared()
    }

    fn packet(g: &Arc<GridSpec>, x0: f64, p0: f64) -> WaveFunction {
        WaveFunction::from_orbital(Arc::clone(g), gaussian_orbital(&OrbitalSpec::new(x0, p0, 1.0), g).unwrap())
    }

    #[test]
    fn boosted_gaussian_moments() {
        let g = grid1();
        let psi = packet(&g, 3.0, 20.0);
        assert!((expect_momentum(&psi, 0).unwrap() - 20.0).abs() < 1e-10);
        assert!((expect_momentum_by_derivative(&psi, 0).unwrap() - 20.0).abs() < 1e-10);
        assert!((expect_position(&psi, 0).unwrap() - 3.0).abs() < 1e-10);
        assert!(matches!(expect_momentum(&psi, 1), Err(Error::AxisOutOfRange { .. })));
    }

    #[test]
    fn real_state_has_no_momentum() {
        let g = grid1();
        let psi = packet(&g, -1.0, 0.0);
        assert!(expect_momentum(&psi, 0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn antisymmetric_pair_has_equal_momenta() {
        let g = GridSpec::new(2, 128, 15.0).unwrap().shared();
        let orbs: Vec<_> = [(-4.0, 5.0), (0.0, 2.0)]
            .iter()
            .map(|&(c, p)| gaussian_orbital(&OrbitalSpec::new(c, p, 1.0), &g).unwrap())
            .collect();
        let psi = antisymmetrize(&orbs, Arc::clone(&g)).unwrap();
        let (p0, p1) = (expect_momentum(&psi, 0).unwrap(), expect_momentum(&psi, 1).unwrap());
        assert!((p0 - p1).abs() < 1e-10);
        assert!((p0 - 3.5).abs() < 1e-8);
        assert!(momentum_route_gap(&psi).unwrap() < 1e-8);
    }

    #[test]
    fn coherent_state_energy_and_record_sum() {
        let g = grid1();
        let terms = build_terms(Arc::clone(&g), 1.0, 0.5, DisorderField::none(&g)).unwrap();
        let rec = energy_decomposition(&packet(&g, 0.0, 20.0), &terms).unwrap();
        // E = p0²/2 + σ⁻²/4 + σ²/4 for σ = 1
        assert!((rec.total - 200.5).abs() < 1e-8);
        assert!((200.0..=202.0).contains(&rec.total));
        assert_eq!(rec.v_disorder, 0.0);
        assert_eq!(rec.v_coulomb, 0.0);
        let sum = rec.kinetic + rec.v_trap + rec.v_disorder + rec.v_coulomb;
        assert!((rec.total - sum).abs() < 1e-10);
        assert!((rec.x_rms[0] - 0.5_f64.sqrt()).abs() < 1e-10);
        assert!((rec.p_rms[0] - 0.5_f64.sqrt()).abs() < 1e-10);
        assert!((virial_residual(&rec).unwrap() - 200.0 / 200.5).abs() < 1e-8);
    }

    #[test]
    fn disorder_energy_matches_direct_quadrature() {
        let g = grid1();
        let d = sample_disorder(&g, 5.0, 1.0, 11).unwrap();
        let terms = build_terms(Arc::clone(&g), 1.0, 0.5, d.clone()).unwrap();
        let psi = packet(&g, 2.0, 1.0);
        let rec = energy_decomposition(&psi, &terms).unwrap();
        let direct: f64 =
            psi.density().iter().zip(&d.amplitudes).map(|(p, v)| p * v).sum::<f64>() * g.dx();
        assert!((rec.v_disorder - direct).abs() < 1e-12);
    }

    #[test]
    fn trap_ground_state_satisfies_virial() {
        let g = GridSpec::new(1, 256, 12.0).unwrap().shared();
        let terms = build_terms(Arc::clone(&g), 1.0, 0.5, DisorderField::none(&g)).unwrap();
        let rec = energy_decomposition(&packet(&g, 0.0, 0.0), &terms).unwrap();
        assert!(virial_residual(&rec).unwrap() < 1e-8);
        assert!((rec.total - 0.5).abs() < 1e-10);
    }

    #[test]
    fn classical_density_properties() {
        let g = grid1();
        let rho = classical_microcanonical_density(&g, 1.0, 20.0).unwrap();
        let centre = g.nearest_index(0.0);
        assert!((rho[centre] - 1.0 / (20.0 * PI)).abs() < 1e-15);
        let m = g.points();
        for i in 1..m {
            assert!((rho[i] - rho[m - i]).abs() < 1e-15);
        }
        let total: f64 = rho.iter().sum::<f64>() * g.dx();
        assert!((total - 1.0).abs() < 1e-3, "{total}");
        assert!(rho.iter().all(|v| v.is_finite() && *v >= 0.0));
        assert!(classical_microcanonical_density(&g, 1.0, 0.0).is_err());
    }

    #[test]
    fn trapezoid_mean_of_a_sinusoid() {
        let times: Vec<f64> = (0..=2000).map(|i| i as f64 * 2.0 * PI / 2000.0).collect();
        let values: Vec<f64> = times.iter().map(|t| 20.0 * t.cos()).collect();
        assert!(window_mean(&times, &values, 0.0, 2.0 * PI).unwrap().abs() < 1e-10);
        let ones = vec![3.0; times.len()];
        assert!((window_mean(&times, &ones, 1.0, 2.0).unwrap() - 3.0).abs() < 1e-14);
        assert!(window_mean(&times, &ones, -1.0, 2.0).is_err());
    }

    #[test]
    fn equilibration_time_of_a_step() {
        let times: Vec<f64> = (0..=300).map(|i| i as f64 * 0.5).collect();
        let residual: Vec<f64> = times.iter().map(|&t| if t < 70.0 { 0.8 } else { 0.01 }).collect();
        let t_eq = equilibration_time(&times, &residual, 10.0, 0.05).unwrap().unwrap();
        // the window starting at s averages 0.8 over max(0, 70 − s)
        assert!((t_eq - 69.5).abs() < 1e-12, "{t_eq}");
        let never = vec![0.5; times.len()];
        assert_eq!(equilibration_time(&times, &never, 10.0, 0.05).unwrap(), None);
    }

    #[test]
    fn phase_space_trace_preserves_order() {
        let rec = |x: f64, p: f64| ObservableRecord {
            time: 0.0,
            x_mean: vec![x],
            p_mean: vec![p],
            x_rms: vec![0.0],
            p_rms: vec![0.0],
            kinetic: 0.0,
            v_trap: 0.0,
            v_disorder: 0.0,
            v_coulomb: 0.0,
            total: 1.0,
        };
        let trace = phase_space_trace(&[rec(0.0, 20.0), rec(20.0, 0.0)], 0).unwrap();
        assert_eq!(trace, vec![(0.0, 20.0), (20.0, 0.0)]);
        assert!(phase_space_trace(&[], 0).is_err());
    }
}
