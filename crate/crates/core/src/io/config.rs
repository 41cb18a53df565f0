//! JSON experiment configuration.

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::hamiltonian::{sample_disorder, HamiltonianTerms};
use crate::propagator::PropagationPlan;
use crate::spectral::ActivationRule;
use crate::state::{antisymmetrize, gaussian_orbital, separable_product, OrbitalSpec, WaveFunction};

pub const DEFAULT_GAMMA_D: f64 = 60.0;
pub const DEFAULT_SIGMA_D: f64 = 0.5;
pub const DEFAULT_SEED: u64 = 2;

pub const PRESET_NAMES: [&str; 4] = ["paper-n1", "paper-n2", "paper-n3", "paper-n2-distinguishable"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Antisymmetrized fermions with soft-core Coulomb repulsion.
    #[default]
    Identical,
    /// Product state, no exchange and no Coulomb term.
    DistinguishableSeparable,
}

/// Every parameter of one run. Missing keys take the N=1 defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub n_particles: usize,
    pub points_per_axis: usize,
    pub half_width: f64,
    pub omega: f64,
    pub alpha: f64,
    pub gamma_d: f64,
    pub sigma_d: f64,
    pub seed: u64,
    pub orbitals: Vec<OrbitalSpec>,
    pub dt: f64,
    pub t_final: f64,
    pub record_stride: usize,
    /// Empty means "the initial orbital centers".
    pub weakvalue_eval_points: Vec<f64>,
    pub mode: Mode,
    pub outputs: PathBuf,
    /// A snapshot is written at the first record at or after each time.
    pub snapshot_times: Vec<f64>,
    /// Clamped to the grid dimension.
    pub spectrum_states: usize,
    pub activation_rule: ActivationRule,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_particles: 1,
            points_per_axis: 1024,
            half_width: 30.0,
            omega: 1.0,
            alpha: 0.5,
            gamma_d: DEFAULT_GAMMA_D,
            sigma_d: DEFAULT_SIGMA_D,
            seed: DEFAULT_SEED,
            orbitals: vec![OrbitalSpec::new(0.0, 20.0, 1.0)],
            dt: 5e-4,
            t_final: 150.0,
            record_stride: 1000,
            weakvalue_eval_points: Vec::new(),
            mode: Mode::Identical,
            outputs: PathBuf::from("out"),
            snapshot_times: Vec::new(),
            spectrum_states: 1024,
            activation_rule: ActivationRule::default(),
        }
    }
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema { path: path.into(), message: message.into() }
}

/// Parses and validates a JSON document. Unknown keys are rejected.
pub fn parse_config(document: &str) -> Result<ExperimentConfig> {
    let mut de = serde_json::Deserializer::from_str(document);
    let config: ExperimentConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        schema(path, e.into_inner().to_string())
    })?;
    de.end().map_err(|e| schema(".", e.to_string()))?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let base = ExperimentConfig::default();
    let config = match name {
        "paper-n1" => base,
        "paper-n2" | "paper-n2-distinguishable" => ExperimentConfig {
            n_particles: 2,
            points_per_axis: 512,
            orbitals: vec![OrbitalSpec::new(0.0, 20.0, 1.0), OrbitalSpec::new(-4.0, 20.0, 1.0)],
            dt: 5e-3,
            record_stride: 100,
            mode: if name == "paper-n2" { Mode::Identical } else { Mode::DistinguishableSeparable },
            ..base
        },
        "paper-n3" => ExperimentConfig {
            n_particles: 3,
            points_per_axis: 128,
            orbitals: vec![
                OrbitalSpec::new(0.0, 20.0, 1.0),
                OrbitalSpec::new(-4.0, 20.0, 1.0),
                OrbitalSpec::new(4.0, 20.0, 1.0),
            ],
            dt: 5e-3,
            record_stride: 100,
            ..base
        },
        other => {
            return Err(schema(
                "preset",
                format!("unknown preset `{other}` (expected one of {})", PRESET_NAMES.join(", ")),
            ))
        }
    };
    config.validate()?;
    Ok(config)
}

impl ExperimentConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.n_particles) {
            return Err(schema("n_particles", format!("must be 1, 2 or 3, got {}", self.n_particles)));
        }
        if self.orbitals.len() != self.n_particles {
            return Err(schema(
                "orbitals",
                format!("orbital count {} does not match n_particles = {}", self.orbitals.len(), self.n_particles),
            ));
        }
        for (name, value) in [
            ("half_width", self.half_width),
            ("omega", self.omega),
            ("alpha", self.alpha),
            ("sigma_d", self.sigma_d),
            ("dt", self.dt),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(schema(name, format!("must be positive and finite, got {value}")));
            }
        }
        if !(self.gamma_d >= 0.0 && self.gamma_d.is_finite()) {
            return Err(schema("gamma_d", format!("must be >= 0, got {}", self.gamma_d)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(schema("t_final", format!("must be >= 0, got {}", self.t_final)));
        }
        if self.record_stride == 0 {
            return Err(schema("record_stride", "must be >= 1"));
        }
        if self.spectrum_states == 0 {
            return Err(schema("spectrum_states", "must be >= 1"));
        }
        for (i, orbital) in self.orbitals.iter().enumerate() {
            orbital
                .validate(self.half_width)
                .map_err(|e| schema(format!("orbitals[{i}]"), e.to_string()))?;
        }
        for (i, &x) in self.weakvalue_eval_points.iter().enumerate() {
            if !(x.abs() < self.half_width) {
                return Err(schema(format!("weakvalue_eval_points[{i}]"), format!("{x} lies outside the box")));
            }
        }
        for (i, &t) in self.snapshot_times.iter().enumerate() {
            if !(0.0..=self.t_final).contains(&t) {
                return Err(schema(format!("snapshot_times[{i}]"), format!("{t} lies outside [0, t_final]")));
            }
        }
        self.plan()?;
        self.grid()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Arc<GridSpec>> {
        Ok(GridSpec::new(self.n_particles, self.points_per_axis, self.half_width)?.shared())
    }

    pub fn plan(&self) -> Result<PropagationPlan> {
        PropagationPlan::new(self.dt, self.t_final, self.record_stride)
    }

    pub fn coulomb_enabled(&self) -> bool {
        self.mode == Mode::Identical
    }

    pub fn hamiltonian(&self, grid: &Arc<GridSpec>) -> Result<HamiltonianTerms> {
        let disorder = sample_disorder(grid, self.gamma_d, self.sigma_d, self.seed)?;
        HamiltonianTerms::build(Arc::clone(grid), self.omega, self.alpha, disorder, self.coulomb_enabled())
    }

    pub fn initial_state(&self, grid: &Arc<GridSpec>) -> Result<WaveFunction> {
        let orbitals = self
            .orbitals
            .iter()
            .map(|spec| gaussian_orbital(spec, grid))
            .collect::<Result<Vec<_>>>()?;
        match self.mode {
            Mode::Identical => antisymmetrize(&orbitals, Arc::clone(grid)),
            Mode::DistinguishableSeparable => separable_product(&orbitals, Arc::clone(grid)),
        }
    }

    pub fn eval_points(&self) -> Vec<f64> {
        if self.weakvalue_eval_points.is_empty() {
            self.orbitals.iter().map(|o| o.center).collect()
        } else {
            self.weakvalue_eval_points.clone()
        }
    }

    /// Largest orbital wavenumber not resolved by the grid, if any.
    pub fn momentum_resolution_gap(&self) -> Option<f64> {
        let k_max = std::f64::consts::PI * self.points_per_axis as f64 / (2.0 * self.half_width);
        self.orbitals
            .iter()
            .map(|o| o.boost.abs() + 4.0 / o.width)
            .filter(|&k| k > k_max)
            .reduce(f64::max)
    }
}
