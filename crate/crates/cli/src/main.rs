use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};
use wvsim::io::{self, ExperimentConfig};
use wvsim::Error;

/// Few-body split-operator dynamics with many-body weak values of momentum.
#[derive(Parser, Debug)]
#[command(name = "wvsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Propagate and write observables, weak values, snapshots and plots.
    Simulate(Run),
    /// Diagonalize the Hamiltonian and write populations and coherences.
    Spectrum(Run),
    /// Propagate and write only the weak values at the given points.
    Weakvalues {
        #[command(flatten)]
        run: Run,
        /// Evaluation points, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        points: Vec<f64>,
    },
    /// Re-render plots/ from the CSV files of an artifact directory.
    Report { dir: PathBuf },
    /// Print a configuration (preset or file, with overrides) as JSON.
    Config(Run),
}

#[derive(Args, Debug)]
struct Run {
    /// JSON config file or preset name (paper-n1, paper-n2, paper-n3, paper-n2-distinguishable).
    config: String,
    #[command(flatten)]
    overrides: Overrides,
}

/// Each flag replaces the config field of the same name.
#[derive(Args, Debug, Default)]
struct Overrides {
    #[arg(long)]
    n_particles: Option<usize>,
    #[arg(long)]
    points_per_axis: Option<usize>,
    #[arg(long)]
    half_width: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma_d: Option<f64>,
    #[arg(long)]
    sigma_d: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Orbitals as `center:boost:width`, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    orbitals: Option<Vec<String>>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    record_stride: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    weakvalue_eval_points: Option<Vec<f64>>,
    /// `identical` or `distinguishable-separable`.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    outputs: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    snapshot_times: Option<Vec<f64>>,
    #[arg(long)]
    spectrum_states: Option<usize>,
    /// `amplitude` or `population`.
    #[arg(long)]
    activation_rule: Option<String>,
}

fn usage(path: &str, message: impl Into<String>) -> Error {
    Error::Schema { path: path.into(), message: message.into() }
}

fn orbital(text: &str) -> Result<Value, Error> {
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| usage("orbitals", format!("`{text}`: {e}")))?;
    match parts[..] {
        [center, boost, width] => Ok(json!({ "center": center, "boost": boost, "width": width })),
        _ => Err(usage("orbitals", format!("`{text}` is not center:boost:width"))),
    }
}

impl Overrides {
    fn apply(&self, fields: &mut Map<String, Value>) -> Result<(), Error> {
        let mut set = |key: &str, value: Option<Value>| {
            if let Some(v) = value {
                fields.insert(key.to_string(), v);
            }
        };
        set("n_particles", self.n_particles.map(Value::from));
        set("points_per_axis", self.points_per_axis.map(Value::from));
        set("half_width", self.half_width.map(Value::from));
        set("omega", self.omega.map(Value::from));
        set("alpha", self.alpha.map(Value::from));
        set("gamma_d", self.gamma_d.map(Value::from));
        set("sigma_d", self.sigma_d.map(Value::from));
        set("seed", self.seed.map(Value::from));
        set("dt", self.dt.map(Value::from));
        set("t_final", self.t_final.map(Value::from));
        set("record_stride", self.record_stride.map(Value::from));
        set("weakvalue_eval_points", self.weakvalue_eval_points.clone().map(Value::from));
        set("mode", self.mode.clone().map(Value::from));
        set("outputs", self.outputs.as_ref().map(|p| Value::from(p.to_string_lossy().into_owned())));
        set("snapshot_times", self.snapshot_times.clone().map(Value::from));
        set("spectrum_states", self.spectrum_states.map(Value::from));
        set("activation_rule", self.activation_rule.clone().map(Value::from));
        if let Some(list) = &self.orbitals {
            let parsed = list.iter().map(|s| orbital(s)).collect::<Result<Vec<_>, _>>()?;
            fields.insert("orbitals".into(), Value::Array(parsed));
        }
        Ok(())
    }
}

fn resolve(run: &Run) -> Result<ExperimentConfig, Error> {
    let base = if io::PRESET_NAMES.contains(&run.config.as_str()) {
        io::preset(&run.config)?
    } else {
        io::load_config(run.config.as_ref())?
    };
    let Value::Object(mut fields) = serde_json::to_value(&base)? else {
        unreachable!("configs serialize to objects")
    };
    run.overrides.apply(&mut fields)?;
    io::parse_config(&Value::Object(fields).to_string())
}

/// Errors while building the configuration are the caller's fault and map
/// to the usage exit code; everything after that is a run failure.
enum Failure {
    Usage(Error),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_usage() {
            Failure::Usage(e)
        } else {
            Failure::Run(e)
        }
    }
}

fn config_of(run: &Run) -> Result<ExperimentConfig, Failure> {
    resolve(run).map_err(Failure::Usage)
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Simulate(run) => {
            let config = config_of(&run)?;
            let out = io::run_experiment(&config)?;
            let meta = &out.meta;
            println!("wrote {}", out.directory.display());
            println!(
                "steps {}  t_eq {}  norm drift {:.2e}  energy drift {:.2e}  wall {:.1} s",
                meta.steps,
                meta.equilibration_time.map_or("none".into(), |t| format!("{t}")),
                meta.norm_drift,
                meta.max_relative_energy_drift,
                meta.wall_clock_seconds
            );
        }
        Command::Spectrum(run) => {
            let config = config_of(&run)?;
            let (_, summary) = io::run_spectrum(&config)?;
            println!("wrote {}", config.outputs.display());
            println!(
                "{} states  completeness {:.9}  peak n = {}  N_act {} ({:?} rule)",
                summary.n_states, summary.completeness, summary.peak_state, summary.activated, summary.activation_rule
            );
        }
        Command::Weakvalues { mut run, points } => {
            run.overrides.weakvalue_eval_points = Some(points);
            let config = config_of(&run)?;
            let rows = io::run_weakvalues(&config)?;
            println!("wrote {} rows to {}", rows.len(), config.outputs.join("weakvalues.csv").display());
        }
        Command::Report { dir } => {
            for path in io::render_directory(&dir)? {
                println!("{}", path.display());
            }
        }
        Command::Config(run) => println!("{}", config_of(&run)?.to_json()),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
