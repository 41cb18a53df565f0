//! Configuration, artifact files and experiment orchestration.
//!
//! An artifact directory written by [`run_experiment`] contains
//!
//! | file | columns / contents |
//! |---|---|
//! | `observables.csv` | `t`, `x_mean_j`, `p_mean_j`, `x_rms_j`, `p_rms_j` (j = 1..N), `kinetic`, `v_trap`, `v_disorder`, `v_coulomb`, `total` |
//! | `weakvalues.csv` | `t`, `x`, `value`, `masked`, `kind`, `p_mean` |
//! | `marginals.csv` | `x`, `density_initial`, `density_final`, `density_late_mean`, `rho_classical` |
//! | `momentum.csv` | `k`, `density_initial`, `density_final` |
//! | `disorder.csv` | `x`, `d` with `#` comment lines carrying the generator parameters |
//! | `meta.json` | configuration, code version, generator id, timings, drifts, `t_eq` |
//! | `snapshots/` | binary states, see [`snapshot`] |
//! | `plots/` | one SVG per plot, each rendered from one of the CSV files |
//!
//! [`run_spectrum`] adds `spectrum.csv` (`n`, `energy`, `spacing`,
//! `population`), `coherence.csv` (`t`, `n`, `m`, `re`, `im`, `abs`) and
//! `spectrum.json`.

pub mod config;
pub mod experiment;
pub mod plots;
pub mod snapshot;
pub mod svg;
pub mod tables;

pub use config::{load_config, parse_config, preset, ExperimentConfig, Mode, PRESET_NAMES};
pub use experiment::{run_experiment, run_experiment_with, run_spectrum, run_weakvalues, ExperimentOutput, RunMeta, SpectrumSummary};
pub use plots::render_directory;
pub use snapshot::{read_snapshot, write_snapshot};
pub use tables::{Table, WeakValueRow};

/// Present in an artifact directory while a run is in progress or after
/// it failed.
pub const INCOMPLETE_MARKER: &str = "INCOMPLETE";
