//! Second-order (Strang) split-operator propagation.
//!
//! One step is `exp(−iV dt/2)·exp(−iK dt)·exp(−iV dt/2)`. The kinetic factor
//! is separable, `Π_j exp(−i k_j² dt/2)`, and is applied axis by axis in
//! momentum space. Between two observer calls the inner potential half-steps
//! are merged into full steps.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{transpose, transpose_square, Fourier, GridSpec};
use crate::hamiltonian::HamiltonianTerms;
use crate::state::WaveFunction;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagationPlan {
    pub dt: f64,
    pub t_final: f64,
    pub record_stride: usize,
}

impl PropagationPlan {
    pub fn new(dt: f64, t_final: f64, record_stride: usize) -> Result<Self> {
        let plan = PropagationPlan { dt, t_final, record_stride };
        plan.total_steps()?;
        Ok(plan)
    }

    /// Number of steps, provided `t_final/dt` is whole within rounding.
    pub fn total_steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(Error::invalid(format!("t_final must be >= 0, got {}", self.t_final)));
        }
        if self.record_stride == 0 {
            return Err(Error::invalid("record_stride must be >= 1"));
        }
        let ratio = self.t_final / self.dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-6 * ratio.max(1.0) {
            return Err(Error::invalid(format!(
                "t_final = {} is not a whole number of steps of dt = {}",
                self.t_final, self.dt
            )));
        }
        Ok(steps as usize)
    }

    /// Time between two observer calls.
    pub fn record_interval(&self) -> f64 {
        self.dt * self.record_stride as f64
    }
}

/// Receives read-only snapshots during [`Propagator::run`].
pub trait Observer {
    fn observe(&mut self, psi: &WaveFunction) -> Result<()>;
}

impl<F> Observer for F
where
    F: FnMut(&WaveFunction) -> Result<()>,
{
    fn observe(&mut self, psi: &WaveFunction) -> Result<()> {
        self(psi)
    }
}

#[derive(Clone, Debug)]
pub struct RunRecord {
    /// Times at which observers were called.
    pub times: Vec<f64>,
    pub final_state: WaveFunction,
    pub steps: usize,
}

pub struct Propagator {
    grid: Arc<GridSpec>,
    dt: f64,
    half_potential: Vec<Complex64>,
    full_potential: Vec<Complex64>,
    /// Potential factors in the axis-swapped layout (two particles only).
    swapped: Option<(Vec<Complex64>, Vec<Complex64>)>,
    /// `exp(−ik²dt/2)/M`, normalization folded in.
    kinetic: Vec<Complex64>,
    fourier: Fourier,
}

impl Propagator {
    pub fn new(terms: &HamiltonianTerms, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        let grid = Arc::clone(terms.grid());
        let v_max = terms.max_abs_potential();
        if dt * v_max >= PI {
            log::warn!("dt·max|V| = {:.3} exceeds π; potential phases wrap within one step", dt * v_max);
        }
        let phase = |v: f64, tau: f64| Complex64::from_polar(1.0, -v * tau);
        let half_potential: Vec<Complex64> =
            terms.total_potential().iter().map(|&v| phase(v, dt / 2.0)).collect();
        let full_potential: Vec<Complex64> =
            terms.total_potential().iter().map(|&v| phase(v, dt)).collect();
        let swapped = (grid.n_particles() == 2).then(|| {
            let m = grid.points();
            let mut half = vec![Complex64::default(); grid.len()];
            let mut full = vec![Complex64::default(); grid.len()];
            transpose(&half_potential, &mut half, m, m);
            transpose(&full_potential, &mut full, m, m);
            (half, full)
        });
        let scale = 1.0 / grid.points() as f64;
        let kinetic = grid.wavenumbers().iter().map(|&k| phase(0.5 * k * k, dt) * scale).collect();
        Ok(Propagator {
            fourier: Fourier::for_grid(&grid),
            grid,
            dt,
            half_potential,
            full_potential,
            swapped,
            kinetic,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn check_grid(&self, psi: &WaveFunction) -> Result<()> {
        if **psi.grid() != *self.grid {
            return Err(Error::invalid("state and Hamiltonian live on different grids"));
        }
        Ok(())
    }

    fn apply_diagonal(data: &mut [Complex64], factor: &[Complex64]) {
        for (z, f) in data.iter_mut().zip(factor) {
            *z *= f;
        }
    }

    /// Advances `psi` by one full step `dt`.
    pub fn step(&mut self, psi: &mut WaveFunction) -> Result<()> {
        self.check_grid(psi)?;
        let t = psi.time();
        self.advance(psi.amplitude_vec_mut(), 1);
        psi.set_time(t + self.dt);
        Ok(())
    }

    /// `steps` merged Strang steps: `V/2 (K V)^{steps-1} K V/2`.
    fn advance(&mut self, data: &mut Vec<Complex64>, steps: usize) {
        if steps == 0 {
            return;
        }
        if self.swapped.is_some() {
            self.advance_pair(data, steps);
            return;
        }
        let contiguous = self.grid.n_particles() == 1;
        Self::apply_diagonal(data, &self.half_potential);
        for s in 0..steps {
            if contiguous {
                self.fourier.filter_lines(data, &self.kinetic);
            } else {
                for axis in 0..self.grid.n_particles() {
                    self.fourier.filter_axis(&self.grid, data, axis, &self.kinetic);
                }
            }
            if s + 1 < steps {
                Self::apply_diagonal(data, &self.full_potential);
            }
        }
        Self::apply_diagonal(data, &self.half_potential);
    }

    /// Two-particle stepping that alternates between the natural and the
    /// axis-swapped layout, so each step needs a single transpose.
    fn advance_pair(&mut self, data: &mut Vec<Complex64>, steps: usize) {
        let m = self.grid.points();
        let (half_swapped, full_swapped) = self.swapped.as_ref().expect("two-particle factors");
        let mut swapped = false;
        Self::apply_diagonal(data, &self.half_potential);
        for s in 0..steps {
            self.fourier.filter_lines(data, &self.kinetic);
            transpose_square(data, m);
            swapped = !swapped;
            self.fourier.filter_lines(data, &self.kinetic);
            if s + 1 < steps {
                let full = if swapped { full_swapped } else { &self.full_potential };
                Self::apply_diagonal(data, full);
            }
        }
        if swapped {
            Self::apply_diagonal(data, half_swapped);
            transpose_square(data, m);
        } else {
            Self::apply_diagonal(data, &self.half_potential);
        }
    }

    /// Evolves `psi0` to `plan.t_final`, calling every observer at `t = 0`,
    /// after every `record_stride` steps, and at the final time.
    pub fn run(
        &mut self,
        psi0: WaveFunction,
        plan: &PropagationPlan,
        observers: &mut [&mut dyn Observer],
    ) -> Result<RunRecord> {
        self.check_grid(&psi0)?;
        if (plan.dt - self.dt).abs() > 1e-15 * self.dt {
            return Err(Error::invalid("plan dt differs from the propagator dt"));
        }
        let total = plan.total_steps()?;
        let t0 = psi0.time();
        let mut psi = psi0;
        let mut times = Vec::with_capacity(total / plan.record_stride + 2);

        notify(observers, &psi)?;
        times.push(psi.time());
        let mut done = 0;
        while done < total {
            let chunk = plan.record_stride.min(total - done);
            self.advance(psi.amplitude_vec_mut(), chunk);
            done += chunk;
            psi.set_time(t0 + done as f64 * self.dt);
            check_finite(&psi, done)?;
            notify(observers, &psi)?;
            times.push(psi.time());
        }
        Ok(RunRecord { times, final_state: psi, steps: total })
    }
}

fn notify(observers: &mut [&mut dyn Observer], psi: &WaveFunction) -> Result<()> {
    for observer in observers.iter_mut() {
        observer
            .observe(psi)
            .map_err(|e| Error::Observer { time: psi.time(), source: Box::new(e) })?;
    }
    Ok(())
}

fn check_finite(psi: &WaveFunction, step: usize) -> Result<()> {
    if psi.amplitudes().iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Ok(());
    }
    let max_amplitude = psi
        .amplitudes()
        .iter()
        .map(|z| z.norm())
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    Err(Error::NanDetected { step, max_amplitude })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_terms, DisorderField};
    use crate::state::{antisymmetrize, gaussian_orbital, OrbitalSpec};

    fn clean_terms(grid: &Arc<GridSpec>) -> HamiltonianTerms {
        build_terms(Arc::clone(grid), 1.0, 0.5, DisorderField::none(grid)).unwrap()
    }

    #[test]
    fn plan_validation() {
        assert_eq!(PropagationPlan::new(0.01, 1.0, 10).unwrap().total_steps().unwrap(), 100);
        assert!(PropagationPlan::new(0.0, 1.0, 1).is_err());
        assert!(PropagationPlan::new(0.01, 1.0, 0).is_err());
        assert!(PropagationPlan::new(0.3, 1.0, 1).is_err());
    }

    #[test]
    fn free_plane_wave_only_acquires_a_phase() {
        let g = GridSpec::new(1, 64, 10.0).unwrap().shared();
        // trap curvature underflows to zero: a free particle
        let terms =
            HamiltonianTerms::build(Arc::clone(&g), 1e-200, 0.5, DisorderField::none(&g), false).unwrap();
        assert_eq!(terms.max_abs_potential(), 0.0);
        let p0 = 4.0 * g.dk();
        let amps = g.positions().iter().map(|&x| Complex64::from_polar(0.1, p0 * x)).collect();
        let psi0 = WaveFunction::new(Arc::clone(&g), amps, 0.0).unwrap();
        let dt = 0.01;
        let mut prop = Propagator::new(&terms, dt).unwrap();
        let mut psi = psi0.clone();
        prop.step(&mut psi).unwrap();
        let expected = Complex64::from_polar(1.0, -p0 * p0 * dt / 2.0);
        for (a, b) in psi.amplitudes().iter().zip(psi0.amplitudes()) {
            assert!((a - b * expected).norm() < 1e-12);
        }
        assert!((psi.time() - dt).abs() < 1e-15);
    }

    #[test]
    fn zero_steps_observes_once() {
        let g = GridSpec::new(1, 64, 10.0).unwrap().shared();
        let terms = clean_terms(&g);
        let psi = WaveFunction::from_orbital(
            Arc::clone(&g),
            gaussian_orbital(&OrbitalSpec::new(0.0, 1.0, 1.0), &g).unwrap(),
        );
        let mut calls = 0;
        let mut obs = |_: &WaveFunction| -> Result<()> {
            calls += 1;
            Ok(())
        };
        let plan = PropagationPlan::new(0.01, 0.0, 5).unwrap();
        let rec = Propagator::new(&terms, 0.01).unwrap().run(psi, &plan, &mut [&mut obs]).unwrap();
        assert_eq!(calls, 1);
        assert_eq!(rec.times, vec![0.0]);
    }

    #[test]
    fn record_count_and_norm() {
        let g = GridSpec::new(1, 128, 15.0).unwrap().shared();
        let terms = clean_terms(&g);
        let psi = WaveFunction::from_orbital(
            Arc::clone(&g),
            gaussian_orbital(&OrbitalSpec::new(0.0, 3.0, 1.0), &g).unwrap(),
        );
        let mut norms = Vec::new();
        let mut obs = |p: &WaveFunction| -> Result<()> {
            norms.push(p.norm());
            Ok(())
        };
        let plan = PropagationPlan::new(0.01, 3.0, 10).unwrap();
        let rec = Propagator::new(&terms, 0.01).unwrap().run(psi, &plan, &mut [&mut obs]).unwrap();
        assert_eq!(rec.times.len(), 31);
        assert_eq!(rec.steps, 300);
        assert!((rec.times[30] - 3.0).abs() < 1e-12);
        assert!(norms.iter().all(|n| (n - 1.0).abs() < 1e-12));
    }

    #[test]
    fn observer_failure_carries_context() {
        let g = GridSpec::new(1, 64, 10.0).unwrap().shared();
        let terms = clean_terms(&g);
        let psi = WaveFunction::from_orbital(
            Arc::clone(&g),
            gaussian_orbital(&OrbitalSpec::new(0.0, 1.0, 1.0), &g).unwrap(),
        );
        let mut obs = |p: &WaveFunction| -> Result<()> {
            if p.time() > 0.05 {
                Err(Error::EmptyWindow)
            } else {
                Ok(())
            }
        };
        let plan = PropagationPlan::new(0.01, 1.0, 3).unwrap();
        let err = Propagator::new(&terms, 0.01).unwrap().run(psi, &plan, &mut [&mut obs]);
        assert!(matches!(err, Err(Error::Observer { .. })));
    }

    #[test]
    fn non_finite_state_is_reported() {
        let g = GridSpec::new(1, 64, 10.0).unwrap().shared();
        let terms = clean_terms(&g);
        let mut amps = vec![Complex64::new(0.1, 0.0); 64];
        amps[3] = Complex64::new(f64::NAN, 0.0);
        let psi = WaveFunction::new(Arc::clone(&g), amps, 0.0).unwrap();
        let plan = PropagationPlan::new(0.01, 0.1, 5).unwrap();
        let err = Propagator::new(&terms, 0.01).unwrap().run(psi, &plan, &mut []);
        assert!(matches!(err, Err(Error::NanDetected { step: 5, .. })));
    }

    #[test]
    fn time_reversal_recovers_the_initial_state() {
        let g = GridSpec::new(2, 64, 12.0).unwrap().shared();
        let terms = build_terms(
            Arc::clone(&g),
            1.0,
            0.5,
            crate::hamiltonian::sample_disorder(&g, 2.0, 1.0, 3).unwrap(),
        )
        .unwrap();
        let orbs: Vec<_> = [-2.0, 1.0]
            .iter()
            .map(|&c| gaussian_orbital(&OrbitalSpec::new(c, 2.0, 1.0), &g).unwrap())
            .collect();
        let psi0 = antisymmetrize(&orbs, Arc::clone(&g)).unwrap();
        let plan = PropagationPlan::new(0.005, 2.0, 50).unwrap();
        let mut prop = Propagator::new(&terms, 0.005).unwrap();
        let forward = prop.run(psi0.clone(), &plan, &mut []).unwrap().final_state;
        assert!(forward.max_antisymmetry_residual() < 1e-8);
        let back = prop.run(forward.conjugate(), &plan, &mut []).unwrap().final_state.conjugate();
        assert!(back.l2_distance(&psi0) < 1e-5);
    }

    #[test]
    fn pair_stepping_matches_independent_one_body_evolution() {
        let m = 64;
        let g1 = GridSpec::new(1, m, 14.0).unwrap().shared();
        let g2 = GridSpec::new(2, m, 14.0).unwrap().shared();
        let a = gaussian_orbital(&OrbitalSpec::new(-1.5, 2.0, 0.9), &g1).unwrap();
        let b = gaussian_orbital(&OrbitalSpec::new(1.0, -1.0, 1.1), &g1).unwrap();
        let product: Vec<Complex64> = a.iter().flat_map(|&u| b.iter().map(move |&v| u * v)).collect();
        let terms1 = HamiltonianTerms::build(Arc::clone(&g1), 1.0, 0.5, DisorderField::none(&g1), false).unwrap();
        let terms2 = HamiltonianTerms::build(Arc::clone(&g2), 1.0, 0.5, DisorderField::none(&g2), false).unwrap();
        for steps in [1usize, 2, 7, 10] {
            let plan = PropagationPlan::new(0.01, 0.01 * steps as f64, steps).unwrap();
            let evolve1 = |orb: &[Complex64]| {
                let psi = WaveFunction::new(Arc::clone(&g1), orb.to_vec(), 0.0).unwrap();
                Propagator::new(&terms1, 0.01).unwrap().run(psi, &plan, &mut []).unwrap().final_state
            };
            let (ua, ub) = (evolve1(&a), evolve1(&b));
            let psi = WaveFunction::new(Arc::clone(&g2), product.clone(), 0.0).unwrap();
            let out = Propagator::new(&terms2, 0.01).unwrap().run(psi, &plan, &mut []).unwrap().final_state;
            let mut worst: f64 = 0.0;
            for i in 0..m {
                for j in 0..m {
                    let want = ua.amplitudes()[i] * ub.amplitudes()[j];
                    worst = worst.max((out.amplitudes()[i * m + j] - want).norm());
                }
            }
            assert!(worst < 1e-12, "steps {steps}: {worst}");
        }
    }
}
