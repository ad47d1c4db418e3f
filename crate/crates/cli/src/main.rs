//! `perthro`: calibration, training and schedule export for pulsed
//! single-qubit feed-forward circuits.
//!
//! Configuration is layered: built-in per-experiment defaults, then an
//! optional TOML file (`--config`), then command-line flags.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use perthro::experiment::{self, ExperimentConfig, ExperimentKind};
use perthro::pulse::GaussianPulse;
use perthro::schedule::{self, PulseSchedule};
use perthro::{CalibrationResult, Circuit, Error};
use serde_json::{json, Map, Value};

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_TRAINING: u8 = 4;
const EXIT_VERIFICATION: u8 = 5;
const EXIT_CALIBRATION: u8 = 6;

#[derive(Parser)]
#[command(name = "perthro", version, about = "Pulsed single-qubit feed-forward circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulated frequency sweep and Rabi calibration.
    Calibrate(CalibrateArgs),
    /// Train and evaluate one experiment (xor, iris, airfoil).
    Run(RunArgs),
    /// Compile a trained circuit into a verified pulse schedule.
    ExportSchedule(ExportArgs),
    /// Check a schedule against the circuit it was compiled from.
    VerifySchedule(VerifyArgs),
    /// Render SVG plots from the CSVs in an output directory.
    Plot {
        /// Directory written by `run` or `calibrate`.
        dir: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Skip SVG rendering.
    #[arg(long)]
    no_plots: bool,
}

#[derive(Args)]
struct CalibrateArgs {
    #[command(flatten)]
    common: Common,
    /// Run only the frequency sweep.
    #[arg(long)]
    sweep_only: bool,
    /// Shots per Rabi point (0 for exact probabilities).
    #[arg(long)]
    rabi_shots: Option<u32>,
    /// Noise level of the simulated sweep response.
    #[arg(long)]
    sweep_noise: Option<f64>,
    /// Resonance of the simulated qubit in Hz.
    #[arg(long)]
    true_frequency: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment to run; may also come from the config file.
    experiment: Option<String>,
    #[command(flatten)]
    common: Common,
    /// Dataset file (iris, airfoil).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Start from this circuit JSON instead of a random initialisation.
    #[arg(long)]
    circuit: Option<PathBuf>,
    /// Pulses per block, comma separated (e.g. 6,12,3).
    #[arg(long, value_delimiter = ',')]
    pulses: Option<Vec<usize>>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    init_scale: Option<f64>,
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Shots per probability readout in the shot-noise evaluation.
    #[arg(long)]
    shots: Option<u32>,
    /// Number of shot-noise trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Disable data parallelism.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct ExportArgs {
    /// Trained circuit JSON.
    #[arg(long)]
    circuit: PathBuf,
    /// Calibration JSON written by `calibrate`.
    #[arg(long)]
    calibration: PathBuf,
    /// Input sample, comma separated, in the circuit's (normalised) units.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    input: Vec<f64>,
    /// Destination schedule file.
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    input: Vec<f64>,
    /// Also require the schedule to reference this calibration.
    #[arg(long)]
    calibration: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Usage(_) => EXIT_CONFIG,
        Error::Data(_) | Error::Parse { .. } | Error::Csv(_) => EXIT_DATA,
        Error::Training { .. } => EXIT_TRAINING,
        Error::Validation(_) => EXIT_VERIFICATION,
        Error::Calibration(_) => EXIT_CALIBRATION,
        _ => EXIT_FAILURE,
    }
}

fn dispatch(command: Command) -> Result<(), Error> {
    match command {
        Command::Calibrate(args) => calibrate(args),
        Command::Run(args) => run(args),
        Command::ExportSchedule(args) => export_schedule(args),
        Command::VerifySchedule(args) => verify_schedule(args),
        Command::Plot { dir } => {
            if !dir.is_dir() {
                return Err(Error::Config(format!("dir: {} is not a directory", dir.display())));
            }
            for path in perthro::plot::render_directory(&dir)? {
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}

fn common_overrides(common: &Common, out: &mut Map<String, Value>) {
    if let Some(seed) = common.seed {
        out.insert("seed".into(), json!(seed));
    }
    if let Some(dir) = &common.output {
        out.insert("output_dir".into(), json!(dir));
    }
    if common.no_plots {
        out.insert("plots".into(), json!(false));
    }
}

fn load_file(common: &Common) -> Result<Option<Value>, Error> {
    common.config.as_deref().map(experiment::load_config_file).transpose()
}

fn report(cfg: &ExperimentConfig, out: &experiment::RunOutput) -> Result<(), Error> {
    println!("{}", serde_json::to_string_pretty(&out.metrics)?);
    eprintln!(
        "wrote {} files to {} (seed {})",
        out.files.len(),
        out.output_dir.display(),
        cfg.seed
    );
    Ok(())
}

fn calibrate(args: CalibrateArgs) -> Result<(), Error> {
    let file = load_file(&args.common)?;
    let mut flags = Map::new();
    common_overrides(&args.common, &mut flags);
    let mut cal = Map::new();
    if args.sweep_only {
        cal.insert("sweep_only".into(), json!(true));
    }
    if let Some(s) = args.rabi_shots {
        cal.insert("rabi_shots".into(), json!(s));
    }
    if let Some(n) = args.sweep_noise {
        cal.insert("sweep_noise".into(), json!(n));
    }
    if let Some(f) = args.true_frequency {
        cal.insert("true_frequency_hz".into(), json!(f));
    }
    if !cal.is_empty() {
        flags.insert("calibration".into(), Value::Object(cal));
    }
    let cfg = ExperimentConfig::resolve(ExperimentKind::Calibrate, file.as_ref(), &Value::Object(flags))?;
    let out = experiment::run(&cfg)?;
    report(&cfg, &out)
}

fn run(args: RunArgs) -> Result<(), Error> {
    let file = load_file(&args.common)?;
    let kind_name = match (&args.experiment, file.as_ref().and_then(|f| f.get("experiment"))) {
        (Some(k), _) => k.clone(),
        (None, Some(Value::String(k))) => k.clone(),
        _ => {
            return Err(Error::Config(
                "experiment: give one of xor, iris, airfoil as an argument or in the config file".into(),
            ))
        }
    };
    let kind: ExperimentKind = kind_name.parse()?;
    if kind == ExperimentKind::Calibrate {
        return Err(Error::Config(
            "experiment: use the `calibrate` subcommand for calibration".into(),
        ));
    }

    let mut flags = Map::new();
    common_overrides(&args.common, &mut flags);
    let mut set = |key: &str, v: Option<Value>| {
        if let Some(v) = v {
            flags.insert(key.into(), v);
        }
    };
    set("data_path", args.data.map(|p| json!(p)));
    set("circuit_path", args.circuit.map(|p| json!(p)));
    set("pulses", args.pulses.map(|p| json!(p)));
    set("epochs", args.epochs.map(|v| json!(v)));
    set("learning_rate", args.learning_rate.map(|v| json!(v)));
    set("batch_size", args.batch_size.map(|v| json!(v)));
    set("init_scale", args.init_scale.map(|v| json!(v)));
    set("train_fraction", args.train_fraction.map(|v| json!(v)));
    set("shots", args.shots.map(|v| json!(v)));
    set("trials", args.trials.map(|v| json!(v)));
    if args.sequential {
        set("execution", Some(json!("sequential")));
    }
    let cfg = ExperimentConfig::resolve(kind, file.as_ref(), &Value::Object(flags))?;
    let out = experiment::run(&cfg)?;
    report(&cfg, &out)
}

fn read_input(path: &Path, field: &str) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Config(format!("{field}: {}: {e}", path.display())))
}

fn load_circuit(path: &Path) -> Result<Circuit, Error> {
    Circuit::from_json(&read_input(path, "circuit")?)
        .map_err(|e| Error::Config(format!("circuit: {}: {e}", path.display())))
}

/// A calibration file that does not describe a usable calibration is a
/// verification failure: the schedule cannot be checked against it.
fn load_calibration(path: &Path) -> Result<CalibrationResult, Error> {
    let text = read_input(path, "calibration")?;
    let cal: CalibrationResult =
        serde_json::from_str(&text).map_err(|e| Error::Validation(format!("calibration: {}: {e}", path.display())))?;
    cal.validate()
        .map_err(|e| Error::Validation(format!("calibration: {}: {e}", path.display())))?;
    Ok(cal)
}

fn export_schedule(args: ExportArgs) -> Result<(), Error> {
    let circuit = load_circuit(&args.circuit)?;
    let cal = load_calibration(&args.calibration)?;
    let sched = schedule::compile_schedule(&circuit, &args.input, Some(&cal), &GaussianPulse::default())?;
    let worst = schedule::verify_schedule(&sched, &circuit, &args.input, Some(&cal))?;
    let text = sched.to_json()?;
    fs::write(&args.output, text + "\n").map_err(|e| Error::Io {
        path: args.output.clone(),
        source: e,
    })?;
    let resets: usize = sched.blocks.iter().map(|b| b.reset_count()).sum();
    println!(
        "wrote {} ({} blocks, {} resets, max deviation {worst:.3e})",
        args.output.display(),
        sched.blocks.len(),
        resets
    );
    Ok(())
}

fn verify_schedule(args: VerifyArgs) -> Result<(), Error> {
    let text = read_input(&args.schedule, "schedule")?;
    let sched = PulseSchedule::from_json(&text)
        .map_err(|e| Error::Validation(format!("schedule: {}: {e}", args.schedule.display())))?;
    let circuit = load_circuit(&args.circuit)?;
    let cal = args.calibration.as_deref().map(load_calibration).transpose()?;
    let worst = schedule::verify_schedule(&sched, &circuit, &args.input, cal.as_ref())?;
    println!("ok: max deviation {worst:.3e}");
    Ok(())
}
