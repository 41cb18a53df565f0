//! Experiment orchestration: one configuration in, one artifact directory out.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::snapshot::write_snapshot;
use super::tables::{write_coherence, write_columns, write_observables, write_spectrum, write_weakvalues, WeakValueRow};
use super::{plots, INCOMPLETE_MARKER};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::hamiltonian::{HamiltonianTerms, DISORDER_GENERATOR_ID};
use crate::observables::{
    classical_microcanonical_density, equilibration_time, virial_residual, ObservableRecord, Probe,
    EQUILIBRATION_THRESHOLD, EQUILIBRATION_WINDOW,
};
use crate::propagator::{Observer, Propagator};
use crate::spectral::{count_activated, diagonalize, ActivationRule, EnergyBasis};
use crate::state::{marginal_momentum_density, marginal_position_density, sorted_by_wavenumber, WaveFunction};
use crate::weakvalues::{weak_identical, weak_pair_row, weak_single, WeakValueField};

/// Fraction of the run after which marginal densities are averaged.
pub const LATE_FRACTION: f64 = 0.8;

/// Threshold of the activated-state count, relative to the peak.
pub const ACTIVATION_FRACTION: f64 = 0.1;

#[derive(Clone, Debug, Serialize)]
pub struct RunMeta {
    pub config: ExperimentConfig,
    pub code_version: String,
    pub disorder_generator_id: String,
    pub started_unix_seconds: u64,
    pub wall_clock_seconds: f64,
    pub steps: usize,
    pub equilibration_time: Option<f64>,
    pub norm_drift: f64,
    pub max_relative_energy_drift: f64,
    pub unresolved_wavenumber: Option<f64>,
}

/// In-memory results of [`run_experiment`], beside the files it wrote.
#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub directory: PathBuf,
    pub records: Vec<ObservableRecord>,
    pub weak_values: Vec<WeakValueRow>,
    pub final_state: WaveFunction,
    pub late_density: Vec<f64>,
    pub meta: RunMeta,
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Writes the marker first and removes it last, so an aborted run is
/// recognisable whatever stopped it.
struct Marker(PathBuf);

impl Marker {
    fn place(dir: &Path) -> Result<Self> {
        let path = dir.join(INCOMPLETE_MARKER);
        std::fs::write(&path, "run did not finish\n").map_err(|e| Error::io(&path, e))?;
        Ok(Marker(path))
    }

    fn clear(self) -> Result<()> {
        std::fs::remove_file(&self.0).map_err(|e| Error::io(&self.0, e))
    }
}

/// The weak-value fields recorded for this run, all for particle 1.
fn weak_fields(psi: &WaveFunction, config: &ExperimentConfig) -> Result<Vec<WeakValueField>> {
    if psi.n_particles() == 1 {
        return Ok(vec![weak_single(psi)?]);
    }
    let mut fields = weak_pair_row(psi, 0)?;
    if config.coulomb_enabled() {
        fields.push(weak_identical(psi)?);
    }
    Ok(fields)
}

fn start_clock() -> (Instant, u64) {
    let unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    (Instant::now(), unix)
}

struct Collected {
    records: Vec<ObservableRecord>,
    weak_values: Vec<WeakValueRow>,
    late_sum: Vec<f64>,
    late_count: usize,
}

fn propagate(
    config: &ExperimentConfig,
    terms: &HamiltonianTerms,
    psi0: WaveFunction,
    snapshots: Option<&Path>,
    with_observables: bool,
    extra: &mut dyn Observer,
) -> Result<(Collected, WaveFunction, usize)> {
    let grid = terms.grid();
    let plan = config.plan()?;
    let points = config.eval_points();
    let t_late = LATE_FRACTION * config.t_final;
    let mut pending: Vec<f64> = config.snapshot_times.clone();
    pending.sort_by(f64::total_cmp);
    pending.reverse();
    let half_dt = 0.5 * config.dt;

    let mut probe = Probe::new(grid);
    let mut out = Collected {
        records: Vec::new(),
        weak_values: Vec::new(),
        late_sum: vec![0.0; grid.points()],
        late_count: 0,
    };
    let mut observer = |psi: &WaveFunction| -> Result<()> {
        let record = probe.measure(psi, terms)?;
        let p_mean = record.p_mean[0];
        for field in weak_fields(psi, config)? {
            for &x in &points {
                let value = field.value_at(grid, x).unwrap_or(f64::NAN);
                out.weak_values.push(WeakValueRow { time: psi.time(), x, value, kind: field.kind, p_mean });
            }
        }
        if with_observables {
            out.records.push(record);
            if psi.time() >= t_late - half_dt {
                let density = marginal_position_density(psi, 0)?;
                out.late_sum.iter_mut().zip(&density).for_each(|(s, d)| *s += d);
                out.late_count += 1;
            }
        }
        if let Some(dir) = snapshots {
            while pending.last().is_some_and(|&t| psi.time() >= t - half_dt) {
                pending.pop();
                write_snapshot(psi, &dir.join(format!("t_{:010.4}.wvs", psi.time())))?;
            }
        }
        Ok(())
    };
    let mut propagator = Propagator::new(terms, config.dt)?;
    let run = propagator.run(psi0, &plan, &mut [&mut observer, extra])?;
    Ok((out, run.final_state, run.steps))
}

fn drifts(records: &[ObservableRecord], norms: (f64, f64)) -> (f64, f64) {
    let e0 = records.first().map_or(0.0, |r| r.total);
    let energy = records
        .iter()
        .map(|r| if e0 != 0.0 { ((r.total - e0) / e0).abs() } else { (r.total - e0).abs() })
        .fold(0.0, f64::max);
    ((norms.1 - norms.0).abs(), energy)
}

fn prepare(config: &ExperimentConfig) -> Result<(std::sync::Arc<GridSpec>, HamiltonianTerms, WaveFunction)> {
    config.validate()?;
    if let Some(k) = config.momentum_resolution_gap() {
        log::warn!("orbital wavenumbers up to {k:.1} exceed the grid cutoff; momentum is under-resolved");
    }
    let grid = config.grid()?;
    let terms = config.hamiltonian(&grid)?;
    let psi0 = config.initial_state(&grid)?;
    Ok((grid, terms, psi0))
}

fn write_meta(dir: &Path, meta: &RunMeta) -> Result<()> {
    let path = dir.join("meta.json");
    let text = serde_json::to_string_pretty(meta)?;
    std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
}

/// Propagates the configured state and writes every artifact into
/// `config.outputs`: `observables.csv`, `weakvalues.csv`, `marginals.csv`,
/// `momentum.csv`, `disorder.csv`, `meta.json`, `snapshots/` and `plots/`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    run_experiment_with(config, &mut |_: &WaveFunction| Ok(()))
}

/// [`run_experiment`] with an additional observer that sees every recorded
/// state after the built-in ones.
pub fn run_experiment_with(config: &ExperimentConfig, extra: &mut dyn Observer) -> Result<ExperimentOutput> {
    let (clock, started) = start_clock();
    let dir = config.outputs.clone();
    create_dir(&dir)?;
    let marker = Marker::place(&dir)?;
    let snapshots = dir.join("snapshots");
    create_dir(&snapshots)?;

    let (grid, terms, psi0) = prepare(config)?;
    terms.disorder().write_csv(&grid, &dir.join("disorder.csv"))?;
    let initial_density = marginal_position_density(&psi0, 0)?;
    let initial_momentum = marginal_momentum_density(&psi0, 0)?;
    let norm0 = psi0.norm();

    let (collected, final_state, steps) = propagate(config, &terms, psi0, Some(&snapshots), true, extra)?;
    let Collected { records, weak_values, late_sum, late_count } = collected;
    write_observables(&dir.join("observables.csv"), &records)?;
    write_weakvalues(&dir.join("weakvalues.csv"), &weak_values)?;

    let late_density: Vec<f64> = late_sum.iter().map(|s| s / late_count.max(1) as f64).collect();
    let l0 = 1.0 / config.omega.sqrt();
    let p0 = config.orbitals[0].boost.abs();
    let rho_cl = if p0 > 0.0 { classical_microcanonical_density(&grid, l0, p0)? } else { vec![f64::NAN; grid.points()] };
    let final_density = marginal_position_density(&final_state, 0)?;
    write_columns(
        &dir.join("marginals.csv"),
        &[
            ("x", grid.positions()),
            ("density_initial", &initial_density),
            ("density_final", &final_density),
            ("density_late_mean", &late_density),
            ("rho_classical", &rho_cl),
        ],
    )?;
    let initial_k = sorted_by_wavenumber(&grid, &initial_momentum);
    let final_k = sorted_by_wavenumber(&grid, &marginal_momentum_density(&final_state, 0)?);
    let ks: Vec<f64> = initial_k.iter().map(|p| p.0).collect();
    write_columns(
        &dir.join("momentum.csv"),
        &[
            ("k", &ks),
            ("density_initial", &initial_k.iter().map(|p| p.1).collect::<Vec<_>>()),
            ("density_final", &final_k.iter().map(|p| p.1).collect::<Vec<_>>()),
        ],
    )?;

    let times: Vec<f64> = records.iter().map(|r| r.time).collect();
    let residual = records.iter().map(virial_residual).collect::<Result<Vec<_>>>()?;
    let t_eq = if config.t_final >= EQUILIBRATION_WINDOW {
        equilibration_time(&times, &residual, EQUILIBRATION_WINDOW, EQUILIBRATION_THRESHOLD)?
    } else {
        None
    };
    let (norm_drift, max_relative_energy_drift) = drifts(&records, (norm0, final_state.norm()));
    let meta = RunMeta {
        config: config.clone(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        disorder_generator_id: DISORDER_GENERATOR_ID.to_string(),
        started_unix_seconds: started,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        steps,
        equilibration_time: t_eq,
        norm_drift,
        max_relative_energy_drift,
        unresolved_wavenumber: config.momentum_resolution_gap(),
    };
    write_meta(&dir, &meta)?;
    plots::render_directory(&dir)?;
    marker.clear()?;
    Ok(ExperimentOutput { directory: dir, records, weak_values, final_state, late_density, meta })
}

/// Runs the propagation but only records weak values at `config`'s
/// evaluation points, into `weakvalues.csv` and its plot.
pub fn run_weakvalues(config: &ExperimentConfig) -> Result<Vec<WeakValueRow>> {
    let dir = config.outputs.clone();
    create_dir(&dir)?;
    let marker = Marker::place(&dir)?;
    let (_, terms, psi0) = prepare(config)?;
    let (collected, _, _) = propagate(config, &terms, psi0, None, false, &mut |_: &WaveFunction| Ok(()))?;
    write_weakvalues(&dir.join("weakvalues.csv"), &collected.weak_values)?;
    plots::render_directory(&dir)?;
    marker.clear()?;
    Ok(collected.weak_values)
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumSummary {
    pub n_states: usize,
    pub completeness: f64,
    pub peak_state: usize,
    pub activated_amplitude_rule: usize,
    pub activated_population_rule: usize,
    pub activated: usize,
    pub activation_rule: ActivationRule,
    pub coherence_pairs: Vec<(usize, usize)>,
}

/// Diagonalizes the configured Hamiltonian, projects the initial state and
/// writes `spectrum.csv`, `coherence.csv` and `spectrum.json`.
pub fn run_spectrum(config: &ExperimentConfig) -> Result<(EnergyBasis, SpectrumSummary)> {
    let dir = config.outputs.clone();
    create_dir(&dir)?;
    let marker = Marker::place(&dir)?;
    let (grid, terms, psi0) = prepare(config)?;
    let dimension = grid.len();
    let basis = diagonalize(&terms, config.spectrum_states.min(dimension))?.projected(&psi0)?;
    write_spectrum(&dir.join("spectrum.csv"), &basis)?;

    let pops = basis.populations();
    let mut order: Vec<usize> = (0..pops.len()).collect();
    order.sort_by(|&a, &b| pops[b].total_cmp(&pops[a]));
    let top: Vec<usize> = order.into_iter().take(3).collect();
    let pairs: Vec<(usize, usize)> =
        top.iter().enumerate().flat_map(|(i, &n)| top[i + 1..].iter().map(move |&m| (n, m))).collect();
    let interval = config.plan()?.record_interval();
    let samples = (config.t_final / interval).round() as usize;
    let times: Vec<f64> = (0..=samples).map(|i| i as f64 * interval).collect();
    write_coherence(&dir.join("coherence.csv"), &basis, &pairs, &times)?;

    let c = basis.coefficients();
    let summary = SpectrumSummary {
        n_states: basis.dimension(),
        completeness: basis.completeness(),
        peak_state: top.first().copied().unwrap_or(0),
        activated_amplitude_rule: count_activated(c, ACTIVATION_FRACTION, ActivationRule::Amplitude)?,
        activated_population_rule: count_activated(c, ACTIVATION_FRACTION, ActivationRule::Population)?,
        activated: count_activated(c, ACTIVATION_FRACTION, config.activation_rule)?,
        activation_rule: config.activation_rule,
        coherence_pairs: pairs,
    };
    let path = dir.join("spectrum.json");
    std::fs::write(&path, serde_json::to_string_pretty(&summary)? + "\n").map_err(|e| Error::io(&path, e))?;
    plots::render_directory(&dir)?;
    marker.clear()?;
    Ok((basis, summary))
}
