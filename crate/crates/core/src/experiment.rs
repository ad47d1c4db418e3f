//! End-to-end experiment runners behind the CLI.
//!
//! Each run resolves an [`ExperimentConfig`], writes its artifacts into the
//! output directory and records a manifest (config hash, seed, version)
//! from which the run can be repeated bit for bit. Everything written to
//! `metrics.json` is a pure function of the resolved config; wall-clock
//! time only appears in `train_report.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::circuit::{Circuit, Head};
use crate::datasets::{self, CsvSchema, DataManifest};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::plot;
use crate::pulse::{self, GaussianPulse};
use crate::qubit::{self, MeasurementConfig};
use crate::rng::{derive_seed, seeded};
use crate::training::{self, LossKind, Metric, Optimizer, ShotTrial, TrainConfig, TrainReport};

const SPLIT_STREAM: u64 = 1;
const INIT_STREAM: u64 = 2;
const TRAIN_STREAM: u64 = 3;
const SHOT_STREAM: u64 = 4;
const CALIBRATION_STREAM: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Xor,
    Iris,
    Airfoil,
    Calibrate,
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xor" => Ok(ExperimentKind::Xor),
            "iris" => Ok(ExperimentKind::Iris),
            "airfoil" => Ok(ExperimentKind::Airfoil),
            "calibrate" => Ok(ExperimentKind::Calibrate),
            other => Err(Error::Config(format!(
                "experiment: unknown kind {other:?} (expected xor, iris, airfoil or calibrate)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    pub true_frequency_hz: f64,
    pub sweep_center_hz: f64,
    pub sweep_half_span_hz: f64,
    pub sweep_points: usize,
    pub sweep_noise: f64,
    pub linewidth_hz: f64,
    pub rabi_min: f64,
    pub rabi_max: f64,
    pub rabi_step: f64,
    /// Shots per Rabi point; `0` measures exact probabilities.
    pub rabi_shots: u32,
    pub sweep_only: bool,
    pub iq_shots: u32,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            true_frequency_hz: 4.971_85e9,
            sweep_center_hz: 4.97e9,
            sweep_half_span_hz: 50e6,
            sweep_points: 101,
            sweep_noise: 0.05,
            linewidth_hz: pulse::DEFAULT_LINEWIDTH_HZ,
            rabi_min: 0.0,
            rabi_max: 2.0,
            rabi_step: 0.05,
            rabi_shots: 1024,
            sweep_only: false,
            iq_shots: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Dataset file for `iris` and `airfoil`.
    pub data_path: Option<PathBuf>,
    /// Optional circuit JSON used as the starting point instead of a random
    /// initialisation.
    pub circuit_path: Option<PathBuf>,
    /// Pulses per block; the last entry is the output width.
    pub pulses: Vec<usize>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub init_scale: f64,
    pub optimizer: Optimizer,
    pub execution: Execution,
    pub train_fraction: f64,
    /// Shots per probability readout in shot-noise evaluation.
    pub shots: u32,
    /// Shot-noise trials; samples are cycled through.
    pub trials: usize,
    /// Master seed for split, initialisation, shuffling and sampling.
    pub seed: u64,
    pub output_dir: PathBuf,
    pub plots: bool,
    pub calibration: CalibrationConfig,
}

impl ExperimentConfig {
    pub fn defaults(kind: ExperimentKind) -> Self {
        let base = ExperimentConfig {
            experiment: kind,
            data_path: None,
            circuit_path: None,
            pulses: vec![2],
            learning_rate: 1e-3,
            epochs: 100,
            batch_size: 16,
            init_scale: 0.5,
            optimizer: Optimizer::adam(),
            execution: Execution::Parallel,
            train_fraction: 0.8,
            shots: 1024,
            trials: 1024,
            seed: 0,
            output_dir: PathBuf::from(format!("out/{}", kind_name(kind))),
            plots: true,
            calibration: CalibrationConfig::default(),
        };
        match kind {
            ExperimentKind::Xor => ExperimentConfig {
                pulses: vec![2],
                learning_rate: 0.1,
                epochs: 5000,
                batch_size: 4,
                init_scale: 1.0,
                ..base
            },
            ExperimentKind::Iris => ExperimentConfig {
                data_path: Some(PathBuf::from("data/iris.csv")),
                pulses: vec![6, 12, 3],
                learning_rate: 1e-3,
                epochs: 35,
                batch_size: 8,
                ..base
            },
            ExperimentKind::Airfoil => ExperimentConfig {
                data_path: Some(PathBuf::from("data/airfoil_self_noise.dat")),
                pulses: vec![6, 12, 1],
                learning_rate: 1e-3,
                epochs: 600,
                batch_size: 16,
                ..base
            },
            ExperimentKind::Calibrate => base,
        }
    }

    /// Layers `defaults(kind)`, then the file table, then `overrides`
    /// (each a partial JSON object). Later layers win key by key.
    pub fn resolve(kind: ExperimentKind, file: Option<&Value>, overrides: &Value) -> Result<Self> {
        let mut merged = serde_json::to_value(Self::defaults(kind))?;
        if let Some(f) = file {
            merge(&mut merged, f);
        }
        merge(&mut merged, overrides);
        merged["experiment"] = serde_json::to_value(kind)?;
        let cfg: ExperimentConfig =
            serde_json::from_value(merged).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed: derive_seed(self.seed, TRAIN_STREAM),
            init_scale: self.init_scale,
            optimizer: self.optimizer,
            execution: self.execution,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiment != ExperimentKind::Calibrate {
            self.train_config()
                .validate()
                .map_err(|e| Error::Config(e.to_string().replace("config error: ", "")))?;
            if self.pulses.is_empty() || self.pulses.contains(&0) {
                return Err(Error::Config("pulses: every block needs at least one pulse".into()));
            }
            if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
                return Err(Error::Config(format!(
                    "train_fraction: must lie strictly between 0 and 1, got {}",
                    self.train_fraction
                )));
            }
            if self.shots == 0 {
                return Err(Error::Config("shots: must be at least 1".into()));
            }
        }
        if matches!(self.experiment, ExperimentKind::Iris | ExperimentKind::Airfoil) {
            match &self.data_path {
                None => return Err(Error::Config("data_path: required for this experiment".into())),
                Some(p) if !p.exists() => {
                    return Err(Error::Data(format!("data_path: {} does not exist", p.display())))
                }
                _ => {}
            }
        }
        if let Some(p) = &self.circuit_path {
            if !p.exists() {
                return Err(Error::Config(format!("circuit_path: {} does not exist", p.display())));
            }
        }
        let c = &self.calibration;
        if c.sweep_points < 3 || c.sweep_half_span_hz <= 0.0 || c.linewidth_hz <= 0.0 {
            return Err(Error::Config(
                "calibration: sweep needs ≥ 3 points, a positive span and a positive linewidth".into(),
            ));
        }
        if !(c.rabi_step > 0.0 && c.rabi_max > c.rabi_min) {
            return Err(Error::Config(
                "calibration: rabi grid must have positive step and extent".into(),
            ));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(serde_json::to_vec(self)?)))
    }
}

fn kind_name(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::Xor => "xor",
        ExperimentKind::Iris => "iris",
        ExperimentKind::Airfoil => "airfoil",
        ExperimentKind::Calibrate => "calibrate",
    }
}

/// Recursive object merge; non-object values replace.
pub fn merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, p) => *b = p.clone(),
    }
}

/// Parses a TOML config file into a JSON value for [`ExperimentConfig::resolve`].
pub fn load_config_file(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let table: toml::Value = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    Ok(serde_json::to_value(table)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: ExperimentKind,
    pub config_sha256: String,
    pub seed: u64,
    pub crate_version: String,
    pub parallel_feature: bool,
    pub data: Option<DataManifest>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub output_dir: PathBuf,
    pub metrics: Value,
    pub files: Vec<PathBuf>,
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Writer {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let p = self.path(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&p, text).map_err(|e| Error::io(&p, e))
    }

    fn csv<F>(&mut self, name: &str, header: &[&str], rows: F) -> Result<()>
    where
        F: FnOnce(&mut csv::Writer<fs::File>) -> Result<()>,
    {
        let p = self.path(name);
        let mut w = csv::Writer::from_path(&p)?;
        w.write_record(header)?;
        rows(&mut w)?;
        w.flush().map_err(|e| Error::io(&p, e))
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let mut out = Writer::new(&cfg.output_dir)?;
    out.json("config.json", cfg)?;
    let (metrics, data) = match cfg.experiment {
        ExperimentKind::Calibrate => (run_calibration(cfg, &mut out)?, None),
        ExperimentKind::Xor => (run_xor(cfg, &mut out)?, None),
        ExperimentKind::Iris | ExperimentKind::Airfoil => {
            let (m, d) = run_dataset(cfg, &mut out)?;
            (m, Some(d))
        }
    };
    let manifest = RunManifest {
        experiment: cfg.experiment,
        config_sha256: cfg.hash()?,
        seed: cfg.seed,
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        parallel_feature: cfg!(feature = "parallel"),
        data,
    };
    out.json("manifest.json", &manifest)?;
    out.json("metrics.json", &metrics)?;
    if cfg.plots {
        let svgs = plot::render_directory(&cfg.output_dir)?;
        out.files.extend(svgs);
    }
    Ok(RunOutput {
        output_dir: cfg.output_dir.clone(),
        metrics,
        files: out.files,
    })
}

fn initial_circuit(cfg: &ExperimentConfig, inputs: usize, head: Head) -> Result<Circuit> {
    if let Some(p) = &cfg.circuit_path {
        let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
        let c = Circuit::from_json(&text).map_err(|e| Error::Config(format!("circuit_path: {}: {e}", p.display())))?;
        if c.input_dim() != inputs || c.head() != &head {
            return Err(Error::Config(format!(
                "circuit_path: circuit does not fit this experiment ({} inputs, head {:?})",
                c.input_dim(),
                c.head()
            )));
        }
        return Ok(c);
    }
    let mut rng = seeded(derive_seed(cfg.seed, INIT_STREAM));
    Circuit::random(inputs, &cfg.pulses, head, cfg.init_scale, &mut rng)
        .map_err(|e| Error::Config(format!("pulses: {e}")))
}

fn write_curve(out: &mut Writer, report: &TrainReport) -> Result<()> {
    let p = out.path("training_curve.csv");
    report.save_csv(&p)?;
    out.json("train_report.json", report)
}

fn write_scatter(out: &mut Writer, trials: &[ShotTrial]) -> Result<()> {
    out.csv(
        "xor_scatter.csv",
        &["trial", "sample", "p1", "p2", "ground_truth", "predicted"],
        |w| {
            for t in trials {
                w.serialize((
                    t.trial,
                    t.sample,
                    t.measured[0],
                    t.measured[1],
                    t.label.unwrap_or_default(),
                    t.predicted.unwrap_or_default(),
                ))?;
            }
            Ok(())
        },
    )
}

/// Trains the two-pulse XOR circuit and scores it noiselessly and under
/// shot noise.
fn run_xor(cfg: &ExperimentConfig, out: &mut Writer) -> Result<Value> {
    let data = datasets::xor_dataset();
    let init = initial_circuit(cfg, 2, Head::xor())?;
    let (circuit, report) = training::train(&init, &data, LossKind::Mse, &cfg.train_config())?;
    let noiseless = training::evaluate(&circuit, &data, Metric::Accuracy)?;
    let shot_seed = derive_seed(cfg.seed, SHOT_STREAM);
    let trials = training::shot_trials(&circuit, &data, cfg.shots, cfg.trials, shot_seed, cfg.execution)?;
    let correct = trials.iter().filter(|t| t.predicted == t.label).count();

    write_curve(out, &report)?;
    write_scatter(out, &trials)?;
    let circuit_path = out.path("circuit.json");
    fs::write(&circuit_path, circuit.to_json()? + "\n").map_err(|e| Error::io(&circuit_path, e))?;

    let truth_table: Vec<Value> = data
        .features
        .iter()
        .map(|x| {
            let z = circuit.forward(x)?;
            let y = circuit.head().apply(z.output()).class();
            Ok(json!({"input": x, "z": z.output(), "prediction": y}))
        })
        .collect::<Result<_>>()?;

    Ok(json!({
        "experiment": "xor",
        "seed": cfg.seed,
        "parameters": circuit.count_parameters(),
        "blocks": circuit.blocks().len(),
        "pulses": circuit.pulse_count(),
        "qubits": circuit.qubit_count(),
        "epochs": cfg.epochs,
        "initial_loss": report.initial_loss,
        "final_loss": report.final_loss(),
        "noiseless_accuracy": noiseless,
        "shots": cfg.shots,
        "shot_trials": cfg.trials,
        "shot_correct": correct,
        "shot_accuracy": correct as f64 / trials.len().max(1) as f64,
        "truth_table": truth_table,
    }))
}

fn dataset_schema(kind: ExperimentKind) -> CsvSchema {
    match kind {
        ExperimentKind::Iris => CsvSchema::iris(),
        _ => CsvSchema::airfoil(),
    }
}

/// Iris classification or Airfoil regression from a local data file.
fn run_dataset(cfg: &ExperimentConfig, out: &mut Writer) -> Result<(Value, DataManifest)> {
    let path = cfg
        .data_path
        .as_ref()
        .ok_or_else(|| Error::Config("data_path: required".into()))?;
    let schema = dataset_schema(cfg.experiment);
    let raw = datasets::load_csv(path, &schema)?;
    let split_seed = derive_seed(cfg.seed, SPLIT_STREAM);
    let (train_raw, test_raw) = datasets::split(&raw, cfg.train_fraction, split_seed)?;
    let classification = cfg.experiment == ExperimentKind::Iris;
    let (train, test) = datasets::normalize_split(&train_raw, &test_raw, !classification)?;

    let (head, loss, metric) = if classification {
        (
            Head::Softmax {
                num_classes: train.target_dim(),
            },
            LossKind::CategoricalCrossEntropy,
            Metric::Accuracy,
        )
    } else {
        (Head::Identity, LossKind::Mse, Metric::Mse)
    };
    let init = initial_circuit(cfg, train.feature_dim(), head)?;
    let (circuit, mut report) = training::train_with_validation(&init, &train, Some(&test), loss, &cfg.train_config())?;
    let train_metric = training::evaluate(&circuit, &train, metric)?;
    let test_metric = training::evaluate(&circuit, &test, metric)?;
    report.final_test_metric = Some(test_metric);
    let shot_metric = training::evaluate_with_shots(
        &circuit,
        &test,
        metric,
        cfg.shots,
        cfg.trials,
        derive_seed(cfg.seed, SHOT_STREAM),
        cfg.execution,
    )?;

    write_curve(out, &report)?;
    let circuit_path = out.path("circuit.json");
    fs::write(&circuit_path, circuit.to_json()? + "\n").map_err(|e| Error::io(&circuit_path, e))?;

    let manifest = DataManifest {
        source_path: path.clone(),
        sha256: datasets::file_sha256(path)?,
        schema,
        rows: raw.len(),
        split_seed,
        train_fraction: cfg.train_fraction,
    };
    let name = kind_name(cfg.experiment);
    let mut metrics = json!({
        "experiment": name,
        "seed": cfg.seed,
        "parameters": circuit.count_parameters(),
        "blocks": circuit.blocks().len(),
        "pulses": circuit.pulse_count(),
        "qubits": circuit.qubit_count(),
        "epochs": cfg.epochs,
        "train_samples": train.len(),
        "test_samples": test.len(),
        "initial_loss": report.initial_loss,
        "final_loss": report.final_loss(),
        "shots": cfg.shots,
        "shot_trials": cfg.trials,
    });
    let m = metrics.as_object_mut().expect("object");
    if classification {
        m.insert("train_accuracy".into(), json!(train_metric));
        m.insert("test_accuracy".into(), json!(test_metric));
        m.insert("shot_test_accuracy".into(), json!(shot_metric));
    } else {
        let scale = train.target_scaling.as_ref().map_or(1.0, |s| s.squared_scale(0));
        m.insert("train_mse".into(), json!(train_metric));
        m.insert("test_mse".into(), json!(test_metric));
        m.insert("shot_test_mse".into(), json!(shot_metric));
        m.insert("test_mse_raw_units".into(), json!(test_metric * scale));
    }
    Ok((metrics, manifest))
}

/// Simulated frequency sweep, Rabi fit and half-π-pulse I/Q readout.
fn run_calibration(cfg: &ExperimentConfig, out: &mut Writer) -> Result<Value> {
    let c = &cfg.calibration;
    let step = 2.0 * c.sweep_half_span_hz / (c.sweep_points - 1) as f64;
    let grid: Vec<f64> = (0..c.sweep_points)
        .map(|k| c.sweep_center_hz - c.sweep_half_span_hz + k as f64 * step)
        .collect();
    let seed = derive_seed(cfg.seed, CALIBRATION_STREAM);
    let sweep = pulse::frequency_sweep_with_linewidth(c.true_frequency_hz, &grid, c.sweep_noise, seed, c.linewidth_hz)
        .map_err(|e| Error::Config(format!("calibration: {e}")))?;
    out.csv("sweep.csv", &["frequency_hz", "response"], |w| {
        for (f, r) in sweep.frequencies_hz.iter().zip(&sweep.response) {
            w.serialize((f, r))?;
        }
        Ok(())
    })?;

    if c.sweep_only {
        out.json(
            "sweep.json",
            &json!({"resonant_frequency_hz": sweep.resonant_frequency_hz}),
        )?;
        return Ok(json!({
            "experiment": "calibrate",
            "seed": cfg.seed,
            "resonant_frequency_hz": sweep.resonant_frequency_hz,
            "frequency_error_hz": sweep.resonant_frequency_hz - c.true_frequency_hz,
            "grid_step_hz": step,
        }));
    }

    let amplitudes = pulse::linear_grid(c.rabi_min, c.rabi_max, c.rabi_step);
    let shots = (c.rabi_shots > 0).then_some(c.rabi_shots);
    let scan = pulse::rabi_scan(&amplitudes, shots, derive_seed(seed, 1))?;
    let mut result = scan.result.clone();
    result.resonant_frequency_hz = Some(sweep.resonant_frequency_hz);
    out.csv("rabi.csv", &["amplitude", "measured", "fit"], |w| {
        for (a, m) in scan.amplitudes.iter().zip(&scan.measured) {
            w.serialize((a, m, result.fit.evaluate(*a)))?;
        }
        Ok(())
    })?;
    out.json("calibration.json", &result)?;

    // Half-π pulse readout, as used to visualise the measurement clouds.
    let mcfg = MeasurementConfig {
        shots: c.iq_shots.max(1),
        rng_seed: derive_seed(seed, 2),
        ..MeasurementConfig::default()
    };
    // The simulated qubit has its true π pulse at amplitude 1.
    let half = qubit::probability_excited(0.5 * result.pi_amplitude)?;
    let points = qubit::emulate_iq_readout(half, &mcfg)?;
    let iq_path = out.path("iq_readout.csv");
    qubit::save_iq_csv(&points, &iq_path)?;

    Ok(json!({
        "experiment": "calibrate",
        "seed": cfg.seed,
        "resonant_frequency_hz": sweep.resonant_frequency_hz,
        "frequency_error_hz": sweep.resonant_frequency_hz - c.true_frequency_hz,
        "grid_step_hz": step,
        "pi_amplitude": result.pi_amplitude,
        "fit": result.fit,
        "residual": result.residual,
        "rabi_shots": c.rabi_shots,
        "pulse_template": GaussianPulse::default(),
    }))
}
