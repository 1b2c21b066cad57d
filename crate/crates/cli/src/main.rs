//! `lfc`: run fusion-rule sweeps and tabulate the underlying model.
//!
//! Exit status is 0 on success, 2 for configuration errors and 3 for runtime
//! or validation failures.

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod manifest;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lfc_core::report::{priors_table, sensor_curve_table, write_priors, write_results, write_sensor_curves};
use lfc_core::validate::{run_validation, ValidationOptions};
use lfc_core::{run_scenario, ParameterModel};

use crate::config::{parse_grid, parse_rules, ConfigError, ConfigFile, Overrides};
use crate::manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(name = "lfc", version, about = "Decision fusion simulations for clustered water-quality sensors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep contamination levels and write one CSV per scenario.
    Simulate(SimulateArgs),
    /// Tabulate hypothesis priors against the parameter spread.
    Priors(TableArgs),
    /// Tabulate sensor false-alarm and miss rates.
    SensorCurves(SensorCurveArgs),
    /// Run the built-in correctness checks.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Number of sensors in the cluster.
    #[arg(long)]
    sensors: Option<usize>,
    /// Mean sensing-error bound.
    #[arg(long)]
    delta_bar: Option<f64>,
    /// Average link SNR in dB.
    #[arg(long)]
    snr_db: Option<f64>,
    /// Comma-separated rules, e.g. `map-hd,mod-map-sd,n-of-m:3`.
    #[arg(long)]
    rules: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TableArgs {
    /// TOML configuration file; only `[defaults.model]` is used.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Spread values, as a list or `start:stop:step`. Overrides `--db`.
    #[arg(long)]
    sigmas: Option<String>,
    /// Variance grid in dB, as a list or `start:stop:step`.
    #[arg(long, default_value = "-20:20:1")]
    db: String,
    /// Output directory; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SensorCurveArgs {
    #[command(flatten)]
    table: TableArgs,
    /// Sensing-error bounds, as a list or `start:stop:step`.
    #[arg(long, default_value = "0,0.05,0.1,0.2,0.3,0.5,0.75,1")]
    deltas: String,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn io_failure(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Runtime(format!("{}: {e}", path.display()))
}

fn flag<T>(name: &str, parsed: Result<T, String>) -> Result<T, Failure> {
    parsed.map_err(|e| Failure::Config(format!("--{name}: {e}")))
}

fn load_file(path: Option<&Path>) -> Result<ConfigFile, Failure> {
    Ok(match path {
        Some(p) => config::load(p)?,
        None => ConfigFile::default(),
    })
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let file = load_file(args.config.as_deref())?;
    let overrides = Overrides {
        seed: args.seed,
        trials: args.trials,
        sensors: args.sensors,
        delta_bar: args.delta_bar,
        snr_db: args.snr_db,
        rules: args.rules.as_deref().map(|r| flag("rules", parse_rules(r))).transpose()?,
    };
    let configs = config::resolve(&file, &overrides)?;
    fs::create_dir_all(&args.out).map_err(io_failure(&args.out))?;

    let mut outputs = Vec::with_capacity(configs.len());
    for cfg in &configs {
        let result = run_scenario(cfg).map_err(|e| Failure::Runtime(format!("scenario `{}`: {e}", cfg.name)))?;
        let path = args.out.join(format!("{}.csv", cfg.name));
        let mut w = BufWriter::new(File::create(&path).map_err(io_failure(&path))?);
        write_results(&mut w, &result.rows())
            .and_then(|()| w.flush())
            .map_err(io_failure(&path))?;
        eprintln!("wrote {}", path.display());
        outputs.push(path);
    }

    let manifest = RunManifest::new(&configs, &outputs);
    let path = args.out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(io_failure(&path))?;
    Ok(())
}

fn table_model(args: &TableArgs) -> Result<(ParameterModel, Vec<f64>), Failure> {
    let model = config::resolve_model(&load_file(args.config.as_deref())?)?;
    let sigmas = match &args.sigmas {
        Some(s) => flag("sigmas", parse_grid(s))?,
        None => flag("db", parse_grid(&args.db))?
            .iter()
            .map(|db| 10f64.powf(db / 20.0))
            .collect(),
    };
    Ok((model, sigmas))
}

fn emit(out: Option<&Path>, file_name: &str, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), Failure> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(io_failure(dir))?;
            let path = dir.join(file_name);
            let mut w = BufWriter::new(File::create(&path).map_err(io_failure(&path))?);
            write(&mut w).and_then(|()| w.flush()).map_err(io_failure(&path))?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock).map_err(|e| Failure::Runtime(format!("stdout: {e}")))?;
        }
    }
    Ok(())
}

fn priors(args: TableArgs) -> Result<(), Failure> {
    let (model, sigmas) = table_model(&args)?;
    let rows = priors_table(&model, &sigmas);
    emit(args.out.as_deref(), "priors.csv", |w| write_priors(w, &rows))
}

fn sensor_curves(args: SensorCurveArgs) -> Result<(), Failure> {
    let (model, sigmas) = table_model(&args.table)?;
    let deltas = flag("deltas", parse_grid(&args.deltas))?;
    let rows = sensor_curve_table(&model, &deltas, &sigmas);
    emit(args.table.out.as_deref(), "sensor_curves.csv", |w| write_sensor_curves(w, &rows))
}

fn validate(args: ValidateArgs) -> Result<(), Failure> {
    let mut opts = ValidationOptions::default();
    if let Some(seed) = args.seed {
        opts.seed = seed;
    }
    let outcomes = run_validation(&opts);
    for o in &outcomes {
        println!(
            "[{}] {}: {} ({:.2} s)",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.detail,
            o.elapsed.as_secs_f64()
        );
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Runtime(format!("{failed} of {} properties failed", outcomes.len())))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Priors(a) => priors(a),
        Command::SensorCurves(a) => sensor_curves(a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error:\n{msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
