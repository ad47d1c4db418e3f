//! Single-qubit state, pulse rotation and measurement emulation.
//!
//! Amplitudes are in π-pulse units: a pulse of amplitude `A` rotates the
//! polar angle by `π·A`, so after a total drive `A` starting from |0⟩ the
//! excitation probability is `sin²(π·A/2)`.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::rng::seeded;

/// Pure state on the Bloch sphere, `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    theta: f64,
    phi: f64,
}

impl QubitState {
    pub fn ground() -> Self {
        QubitState { theta: 0.0, phi: 0.0 }
    }

    pub fn excited() -> Self {
        QubitState { theta: PI, phi: 0.0 }
    }

    /// Builds a state from arbitrary angles, folding them into
    /// `θ ∈ [0, π]`, `φ ∈ [0, 2π)`.
    pub fn from_angles(theta: f64, phi: f64) -> Result<Self> {
        ensure_finite(theta, "theta")?;
        ensure_finite(phi, "phi")?;
        Ok(canonical(theta, phi))
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// `(α, β)` with α real and non-negative.
    pub fn amplitudes(&self) -> (Complex64, Complex64) {
        let half = self.theta / 2.0;
        (
            Complex64::new(half.cos(), 0.0),
            Complex64::from_polar(half.sin(), self.phi),
        )
    }

    /// `|β|²`, the probability of reading |1⟩.
    pub fn probability_excited(&self) -> f64 {
        let s = (self.theta / 2.0).sin();
        s * s
    }

    pub fn probability_ground(&self) -> f64 {
        let c = (self.theta / 2.0).cos();
        c * c
    }

    /// Rotates the state by `π·amplitude` about the drive axis (the Bloch
    /// y axis, so pulses from |0⟩ stay on the `φ = 0` meridian).
    pub fn apply_pulse(&self, amplitude: f64) -> Result<Self> {
        ensure_finite(amplitude, "pulse amplitude")?;
        let (alpha, beta) = self.amplitudes();
        let half = PI * amplitude / 2.0;
        let (s, c) = half.sin_cos();
        let a = alpha * c - beta * s;
        let b = alpha * s + beta * c;
        let theta = 2.0 * b.norm().atan2(a.norm());
        // Relative phase is undefined at the poles; keep it at zero there.
        let phi = if a.norm() == 0.0 || b.norm() == 0.0 {
            0.0
        } else {
            b.arg() - a.arg()
        };
        Ok(canonical(theta, phi))
    }
}

impl Default for QubitState {
    fn default() -> Self {
        Self::ground()
    }
}

fn canonical(theta: f64, phi: f64) -> QubitState {
    let mut t = theta.rem_euclid(TAU);
    let mut p = phi;
    if t > PI {
        // Past the south pole: reflect onto the opposite meridian.
        t = TAU - t;
        p += PI;
    }
    let mut p = p.rem_euclid(TAU);
    if p >= TAU {
        p = 0.0;
    }
    QubitState { theta: t, phi: p }
}

/// Free function form of [`QubitState::apply_pulse`].
pub fn apply_pulse(state: QubitState, amplitude: f64) -> Result<QubitState> {
    state.apply_pulse(amplitude)
}

/// `P(|1⟩) = sin²(π·A/2)` for a cumulative drive amplitude `A`.
pub fn probability_excited(cumulative_amplitude: f64) -> Result<f64> {
    ensure_finite(cumulative_amplitude, "cumulative amplitude")?;
    let s = (PI / 2.0 * cumulative_amplitude).sin();
    Ok(s * s)
}

/// `P(|0⟩) = cos²(π·A/2)`.
pub fn probability_ground(cumulative_amplitude: f64) -> Result<f64> {
    ensure_finite(cumulative_amplitude, "cumulative amplitude")?;
    let c = (PI / 2.0 * cumulative_amplitude).cos();
    Ok(c * c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementConfig {
    pub shots: u32,
    pub rng_seed: u64,
    pub iq_ground_mean: [f64; 2],
    pub iq_excited_mean: [f64; 2],
    pub iq_cloud_sigma: f64,
}

impl Default for MeasurementConfig {
    fn default() -> Self {
        MeasurementConfig {
            shots: 1024,
            rng_seed: 0,
            iq_ground_mean: [-1.5, 0.5],
            iq_excited_mean: [1.5, -0.5],
            iq_cloud_sigma: 0.4,
        }
    }
}

impl MeasurementConfig {
    pub fn with_shots(shots: u32, rng_seed: u64) -> Self {
        MeasurementConfig {
            shots,
            rng_seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::Usage("shots must be at least 1".into()));
        }
        if !(self.iq_cloud_sigma > 0.0 && self.iq_cloud_sigma.is_finite()) {
            return Err(Error::Usage(format!(
                "iq_cloud_sigma must be positive, got {}",
                self.iq_cloud_sigma
            )));
        }
        Ok(())
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability must lie in [0, 1], got {p}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotSample {
    pub count_excited: u64,
    pub estimate: f64,
}

/// Binomial draw of `cfg.shots` measurements at excitation probability `p`.
pub fn sample_shots(p: f64, cfg: &MeasurementConfig) -> Result<ShotSample> {
    let mut rng = seeded(cfg.rng_seed);
    sample_shots_with(p, cfg.shots, &mut rng)
}

/// Same as [`sample_shots`] but drawing from a caller-owned stream.
pub fn sample_shots_with<R: Rng + ?Sized>(p: f64, shots: u32, rng: &mut R) -> Result<ShotSample> {
    check_probability(p)?;
    if shots == 0 {
        return Err(Error::Usage("shots must be at least 1".into()));
    }
    let binomial =
        Binomial::new(u64::from(shots), p).map_err(|e| Error::Domain(format!("binomial({shots}, {p}): {e}")))?;
    let count_excited = binomial.sample(rng);
    Ok(ShotSample {
        count_excited,
        estimate: count_excited as f64 / f64::from(shots),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IqPoint {
    pub i: f64,
    pub q: f64,
    /// 0 for a ground readout, 1 for excited.
    pub label: u8,
    pub shot_index: u32,
}

/// Emulated I/Q readout: one labelled point per shot, scattered around the
/// configured cluster mean of the measured outcome.
pub fn emulate_iq_readout(p: f64, cfg: &MeasurementConfig) -> Result<Vec<IqPoint>> {
    check_probability(p)?;
    cfg.validate()?;
    let mut rng = seeded(cfg.rng_seed);
    let noise = Normal::new(0.0, cfg.iq_cloud_sigma).map_err(|e| Error::Usage(format!("iq_cloud_sigma: {e}")))?;
    let points = (0..cfg.shots)
        .map(|shot_index| {
            let excited = rng.random::<f64>() < p;
            let mean = if excited {
                cfg.iq_excited_mean
            } else {
                cfg.iq_ground_mean
            };
            IqPoint {
                i: mean[0] + noise.sample(&mut rng),
                q: mean[1] + noise.sample(&mut rng),
                label: u8::from(excited),
                shot_index,
            }
        })
        .collect();
    Ok(points)
}

pub fn write_iq_csv<W: Write>(points: &[IqPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "q", "label", "shot_index"])?;
    for pt in points {
        w.serialize((pt.i, pt.q, pt.label, pt.shot_index))?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn save_iq_csv(points: &[IqPoint], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_iq_csv(points, file)
}
