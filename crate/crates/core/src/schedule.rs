//! Pulse-schedule compilation for hardware that caps trains at four pulses.
//!
//! A block's `n` amplitudes are cut into trains of at most four. The qubit
//! is reset to |0⟩ between trains, and the rotation accumulated so far is
//! carried forward by folding it (mod 2, the period of `sin²(π·A/2)`) into
//! the first pulse of the next train. Playing the chunked schedule thus
//! reproduces the probabilities of the uninterrupted train.
//!
//! JSON layout (version 1):
//!
//! ```text
//! {
//!   "version": 1,
//!   "calibration_ref": "<16 hex digits of the calibration's SHA-256>",
//!   "pulse_template": { "amplitude_scale": …, "width_s": …, "center_s": … },
//!   "blocks": [
//!     { "qubit_index": 0,
//!       "trains": [
//!         { "amplitudes": [..≤4 values in [0, 2)..],
//!           "carry_offset_in": <accumulated amplitude before this train, mod 2>,
//!           "reset_after": <true on every train but the last> } ] } ]
//! }
//! ```
//!
//! `amplitudes` are in π-pulse units with the carry already folded into the
//! first entry; multiply by `amplitude_scale` (the calibrated π amplitude)
//! for the drive level.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::pulse::{CalibrationResult, GaussianPulse};
use crate::qubit::QubitState;

pub const SCHEDULE_VERSION: u32 = 1;
pub const MAX_PULSES_PER_TRAIN: usize = 4;
/// Period of the excitation probability in amplitude units.
pub const AMPLITUDE_PERIOD: f64 = 2.0;

const CARRY_TOLERANCE: f64 = 1e-9;
pub const VERIFY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseTemplate {
    pub amplitude_scale: f64,
    pub width_s: f64,
    pub center_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduledTrain {
    pub amplitudes: Vec<f64>,
    pub carry_offset_in: f64,
    pub reset_after: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduledBlock {
    pub qubit_index: usize,
    pub trains: Vec<ScheduledTrain>,
}

impl ScheduledBlock {
    pub fn pulse_count(&self) -> usize {
        self.trains.iter().map(|t| t.amplitudes.len()).sum()
    }

    pub fn reset_count(&self) -> usize {
        self.trains.iter().filter(|t| t.reset_after).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub version: u32,
    pub calibration_ref: String,
    pub pulse_template: PulseTemplate,
    pub blocks: Vec<ScheduledBlock>,
}

/// Folds an amplitude into `[0, 2)`.
pub fn wrap_amplitude(a: f64) -> f64 {
    let w = a.rem_euclid(AMPLITUDE_PERIOD);
    if w >= AMPLITUDE_PERIOD {
        0.0
    } else {
        w
    }
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = wrap_amplitude(a - b);
    d.min(AMPLITUDE_PERIOD - d)
}

/// Short content hash identifying a calibration.
pub fn calibration_ref(cal: &CalibrationResult) -> Result<String> {
    let bytes = serde_json::to_vec(cal)?;
    Ok(hex::encode(Sha256::digest(&bytes))[..16].to_string())
}

/// Chunks one block's raw amplitudes into trains.
pub fn chunk_amplitudes(raw: &[f64]) -> Vec<ScheduledTrain> {
    let chunks: Vec<&[f64]> = raw.chunks(MAX_PULSES_PER_TRAIN).collect();
    let last = chunks.len().saturating_sub(1);
    let mut carry = 0.0;
    chunks
        .into_iter()
        .enumerate()
        .map(|(k, chunk)| {
            let amplitudes = chunk
                .iter()
                .enumerate()
                .map(|(i, &a)| wrap_amplitude(if i == 0 { carry + a } else { a }))
                .collect();
            let train = ScheduledTrain {
                amplitudes,
                carry_offset_in: carry,
                reset_after: k != last,
            };
            carry = wrap_amplitude(carry + chunk.iter().sum::<f64>());
            train
        })
        .collect()
}

/// Compiles the schedule that evaluates `circuit` on input `x`. Later
/// blocks are driven by the exact probabilities of earlier ones.
pub fn compile_schedule(
    circuit: &Circuit,
    x: &[f64],
    calibration: Option<&CalibrationResult>,
    template: &GaussianPulse,
) -> Result<PulseSchedule> {
    let cal = calibration.ok_or_else(|| Error::Calibration("schedule compilation needs a calibration".into()))?;
    cal.validate()?;
    template.validate()?;
    let trace = circuit.forward(x)?;
    let blocks = circuit
        .blocks()
        .iter()
        .zip(&trace.traces)
        .enumerate()
        .map(|(qubit_index, (block, bt))| {
            let raw = block.modulate_amplitudes(&bt.input)?;
            Ok(ScheduledBlock {
                qubit_index,
                trains: chunk_amplitudes(&raw),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PulseSchedule {
        version: SCHEDULE_VERSION,
        calibration_ref: calibration_ref(cal)?,
        pulse_template: PulseTemplate {
            amplitude_scale: cal.pi_amplitude,
            width_s: template.width_s,
            center_s: template.center_s,
        },
        blocks,
    })
}

/// One schedule per sample.
pub fn compile_batch(
    circuit: &Circuit,
    inputs: &[Vec<f64>],
    calibration: Option<&CalibrationResult>,
    template: &GaussianPulse,
    exec: Execution,
) -> Result<Vec<PulseSchedule>> {
    exec.map_slice(inputs, |x| compile_schedule(circuit, x, calibration, template))
        .into_iter()
        .collect()
}

impl PulseSchedule {
    /// Structural checks: version, train sizes, amplitude range, reset
    /// markers and carry bookkeeping.
    pub fn validate(&self) -> Result<()> {
        if self.version != SCHEDULE_VERSION {
            return Err(Error::Validation(format!(
                "unsupported schedule version {} (expected {SCHEDULE_VERSION})",
                self.version
            )));
        }
        if !(self.pulse_template.amplitude_scale > 0.0 && self.pulse_template.amplitude_scale.is_finite()) {
            return Err(Error::Validation("amplitude_scale must be positive".into()));
        }
        for (b, block) in self.blocks.iter().enumerate() {
            if block.trains.is_empty() {
                return Err(Error::Validation(format!("block {b} has no trains")));
            }
            let last = block.trains.len() - 1;
            let mut expected_carry = 0.0;
            for (k, train) in block.trains.iter().enumerate() {
                let n = train.amplitudes.len();
                if !(1..=MAX_PULSES_PER_TRAIN).contains(&n) {
                    return Err(Error::Validation(format!(
                        "block {b} train {k} has {n} pulses (allowed 1–{MAX_PULSES_PER_TRAIN})"
                    )));
                }
                if let Some(a) = train
                    .amplitudes
                    .iter()
                    .find(|a| !(a.is_finite() && (0.0..AMPLITUDE_PERIOD).contains(*a)))
                {
                    return Err(Error::Validation(format!(
                        "block {b} train {k} amplitude {a} outside [0, 2)"
                    )));
                }
                if train.reset_after != (k != last) {
                    return Err(Error::Validation(format!(
                        "block {b} train {k} has reset_after = {} ",
                        train.reset_after
                    )));
                }
                if !train.carry_offset_in.is_finite()
                    || circular_distance(train.carry_offset_in, expected_carry) > CARRY_TOLERANCE
                {
                    return Err(Error::Validation(format!(
                        "block {b} train {k} carry_offset_in {} does not match accumulated amplitude {expected_carry}",
                        train.carry_offset_in
                    )));
                }
                expected_carry = wrap_amplitude(train.amplitudes.iter().sum());
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Plays every block's trains on a simulated qubit, resetting between
/// trains, and returns `P(|1⟩)` after each pulse.
pub fn simulate_schedule(schedule: &PulseSchedule) -> Result<Vec<Vec<f64>>> {
    schedule.validate()?;
    schedule
        .blocks
        .iter()
        .map(|block| {
            let mut z = Vec::with_capacity(block.pulse_count());
            for train in &block.trains {
                let mut state = QubitState::ground();
                for &a in &train.amplitudes {
                    state = state.apply_pulse(a)?;
                    z.push(state.probability_excited());
                }
            }
            Ok(z)
        })
        .collect()
}

/// Checks a schedule against the circuit it claims to implement: the
/// structure must validate, the calibration (when given) must match, and
/// the simulated probabilities must equal the circuit's forward pass within
/// [`VERIFY_TOLERANCE`].
pub fn verify_schedule(
    schedule: &PulseSchedule,
    circuit: &Circuit,
    x: &[f64],
    calibration: Option<&CalibrationResult>,
) -> Result<f64> {
    if let Some(cal) = calibration {
        let expected = calibration_ref(cal)?;
        if schedule.calibration_ref != expected {
            return Err(Error::Validation(format!(
                "schedule references calibration {} but {} was supplied",
                schedule.calibration_ref, expected
            )));
        }
    }
    let simulated = simulate_schedule(schedule)?;
    let trace = circuit.forward(x)?;
    if simulated.len() != trace.traces.len() {
        return Err(Error::Validation(format!(
            "schedule has {} blocks, circuit has {}",
            simulated.len(),
            trace.traces.len()
        )));
    }
    let mut worst = 0.0f64;
    for (b, (sim, bt)) in simulated.iter().zip(&trace.traces).enumerate() {
        if sim.len() != bt.output.len() {
            return Err(Error::Validation(format!(
                "block {b}: schedule plays {} pulses, circuit block has {}",
                sim.len(),
                bt.output.len()
            )));
        }
        for (s, z) in sim.iter().zip(&bt.output) {
            worst = worst.max((s - z).abs());
        }
    }
    if worst > VERIFY_TOLERANCE {
        return Err(Error::Validation(format!(
            "simulated schedule deviates from the circuit by {worst:e}"
        )));
    }
    Ok(worst)
}
