//! Gaussian drive pulses, pulse trains and simulated calibration.
//!
//! Calibration mirrors the two bench experiments used to define a π-pulse:
//! a frequency sweep that locates the absorption peak, then a Rabi scan
//! over drive amplitude whose fitted sinusoid gives the π amplitude as half
//! the oscillation period.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::qubit::{self, QubitState};
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPulse {
    pub amplitude: f64,
    pub frequency_hz: f64,
    pub center_s: f64,
    pub width_s: f64,
}

impl Default for GaussianPulse {
    fn default() -> Self {
        GaussianPulse {
            amplitude: 1.0,
            frequency_hz: 4.97e9,
            center_s: 35.6e-9,
            width_s: 8.9e-9,
        }
    }
}

impl GaussianPulse {
    pub fn validate(&self) -> Result<()> {
        for (v, name) in [
            (self.amplitude, "amplitude"),
            (self.frequency_hz, "frequency"),
            (self.center_s, "center"),
            (self.width_s, "width"),
        ] {
            ensure_finite(v, name)?;
        }
        if self.width_s <= 0.0 {
            return Err(Error::Usage(format!(
                "pulse width must be positive, got {}",
                self.width_s
            )));
        }
        Ok(())
    }

    /// `A·exp(−(t−γ)²/(2τ²))`.
    pub fn envelope(&self, t: f64) -> f64 {
        let u = (t - self.center_s) / self.width_s;
        self.amplitude * (-0.5 * u * u).exp()
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        GaussianPulse { amplitude, ..*self }
    }
}

pub fn envelope(pulse: &GaussianPulse, t: f64) -> f64 {
    pulse.envelope(t)
}

/// Ordered pulse amplitudes sharing one envelope template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseTrain {
    amplitudes: Vec<f64>,
    template: GaussianPulse,
}

impl PulseTrain {
    pub fn new(amplitudes: Vec<f64>, template: GaussianPulse) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Usage("a pulse train needs at least one pulse".into()));
        }
        for &a in &amplitudes {
            ensure_finite(a, "train amplitude")?;
        }
        template.validate()?;
        Ok(PulseTrain { amplitudes, template })
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn template(&self) -> &GaussianPulse {
        &self.template
    }

    pub fn pulses(&self) -> impl Iterator<Item = GaussianPulse> + '_ {
        self.amplitudes.iter().map(|&a| self.template.with_amplitude(a))
    }

    /// Plays the train on a qubit starting in |0⟩ and reads `P(|1⟩)` after
    /// every pulse.
    pub fn play(&self) -> Vec<f64> {
        let mut state = QubitState::ground();
        self.amplitudes
            .iter()
            .map(|&a| {
                // amplitudes were checked finite at construction
                state = state.apply_pulse(a).expect("finite amplitude");
                state.probability_excited()
            })
            .collect()
    }
}

/// Sinusoidal excitation law `g(A) = a·sin(η·A + phase) + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcitationModel {
    pub eta: f64,
    pub a: f64,
    pub c: f64,
    #[serde(default)]
    pub phase: f64,
}

impl Default for ExcitationModel {
    fn default() -> Self {
        ExcitationModel {
            eta: 1.0,
            a: 1.0,
            c: 0.0,
            phase: 0.0,
        }
    }
}

impl ExcitationModel {
    pub fn evaluate(&self, amplitude: f64) -> f64 {
        self.a * (self.eta * amplitude + self.phase).sin() + self.c
    }

    /// Half the oscillation period, `π/η`.
    pub fn half_period(&self) -> f64 {
        PI / self.eta
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub resonant_frequency_hz: Option<f64>,
    pub pi_amplitude: f64,
    pub fit: ExcitationModel,
    pub residual: f64,
}

impl CalibrationResult {
    pub fn validate(&self) -> Result<()> {
        if !(self.pi_amplitude.is_finite() && self.pi_amplitude > 0.0) {
            return Err(Error::Calibration(format!(
                "pi_amplitude must be positive, got {}",
                self.pi_amplitude
            )));
        }
        if !(self.residual.is_finite() && self.residual >= 0.0) {
            return Err(Error::Calibration(format!(
                "residual must be non-negative, got {}",
                self.residual
            )));
        }
        if let Some(f) = self.resonant_frequency_hz {
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::Calibration(format!(
                    "resonant frequency must be positive, got {f}"
                )));
            }
        }
        Ok(())
    }
}

/// Qubit linewidth used by [`frequency_sweep`].
pub const DEFAULT_LINEWIDTH_HZ: f64 = 5.0e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub resonant_frequency_hz: f64,
    pub frequencies_hz: Vec<f64>,
    pub response: Vec<f64>,
}

pub fn frequency_sweep(true_qubit_freq: f64, grid: &[f64], noise_sigma: f64, seed: u64) -> Result<SweepResult> {
    frequency_sweep_with_linewidth(true_qubit_freq, grid, noise_sigma, seed, DEFAULT_LINEWIDTH_HZ)
}

/// Simulated absorption scan: a unit-height Lorentzian of half-width
/// `linewidth_hz` centred on the qubit frequency plus seeded Gaussian noise.
/// The peak is the argmax refined by a three-point parabola, clamped to half
/// a grid step either side.
pub fn frequency_sweep_with_linewidth(
    true_qubit_freq: f64,
    grid: &[f64],
    noise_sigma: f64,
    seed: u64,
    linewidth_hz: f64,
) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::Usage("frequency grid is empty".into()));
    }
    if grid.iter().any(|f| !f.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Usage(
            "frequency grid must be finite and strictly increasing".into(),
        ));
    }
    ensure_finite(true_qubit_freq, "qubit frequency")?;
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::Usage(format!(
            "noise_sigma must be non-negative, got {noise_sigma}"
        )));
    }
    if !(linewidth_hz > 0.0 && linewidth_hz.is_finite()) {
        return Err(Error::Usage(format!("linewidth must be positive, got {linewidth_hz}")));
    }

    let mut rng = seeded(seed);
    let noise = (noise_sigma > 0.0).then(|| Normal::new(0.0, noise_sigma).expect("valid sigma"));
    let response: Vec<f64> = grid
        .iter()
        .map(|&f| {
            let u = (f - true_qubit_freq) / linewidth_hz;
            let clean = 1.0 / (1.0 + u * u);
            clean + noise.as_ref().map_or(0.0, |n| n.sample(&mut rng))
        })
        .collect();

    let peak = response
        .iter()
        .enumerate()
        .fold(0, |best, (i, &y)| if y > response[best] { i } else { best });
    let mut estimate = grid[peak];
    if peak > 0 && peak + 1 < grid.len() {
        let (y0, y1, y2) = (response[peak - 1], response[peak], response[peak + 1]);
        let curvature = y0 - 2.0 * y1 + y2;
        if curvature < 0.0 {
            let offset = (0.5 * (y0 - y2) / curvature).clamp(-0.5, 0.5);
            let step = if offset >= 0.0 {
                grid[peak + 1] - grid[peak]
            } else {
                grid[peak] - grid[peak - 1]
            };
            estimate += offset * step;
        }
    }

    Ok(SweepResult {
        resonant_frequency_hz: estimate,
        frequencies_hz: grid.to_vec(),
        response,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidFit {
    pub model: ExcitationModel,
    /// Root-mean-square residual.
    pub residual: f64,
    pub iterations: usize,
}

const COARSE_STEPS: usize = 4000;
const MAX_ITERATIONS: usize = 200;
const STEP_TOLERANCE: f64 = 1e-9;

/// Least-squares fit of `a·sin(η·x + phase) + c`.
///
/// A coarse scan over η (each candidate solved exactly for the linear
/// parameters) seeds a Levenberg-Marquardt refinement of all four. The
/// returned model has `a > 0`, `η > 0` and `phase ∈ (−π, π]`.
pub fn fit_sinusoid(xs: &[f64], ys: &[f64]) -> Result<SinusoidFit> {
    fit_sinusoid_weighted(xs, ys, &vec![1.0; ys.len()])
}

/// [`fit_sinusoid`] minimising `Σ wᵢ·rᵢ²`. The reported residual is the
/// unweighted RMS.
pub fn fit_sinusoid_weighted(xs: &[f64], ys: &[f64], weights: &[f64]) -> Result<SinusoidFit> {
    if xs.len() != ys.len() || weights.len() != ys.len() {
        return Err(Error::Usage(format!(
            "{} abscissae, {} samples and {} weights",
            xs.len(),
            ys.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::Usage("fit weights must be positive and finite".into()));
    }
    if xs.len() < 5 {
        return Err(Error::Calibration(format!(
            "need at least 5 points to fit a sinusoid, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Calibration("fit data contains non-finite values".into()));
    }
    let n = ys.len() as f64;
    let mean = ys.iter().sum::<f64>() / n;
    let variance = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
    if variance < 1e-20 {
        return Err(Error::Calibration(
            "data are constant; sinusoid is unconstrained".into(),
        ));
    }

    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let min_gap = sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|g| *g > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !(span > 0.0 && min_gap.is_finite()) {
        return Err(Error::Calibration("fit abscissae do not span an interval".into()));
    }

    // Periods from twice the span down to the Nyquist limit.
    let eta_min = PI / span;
    let eta_max = PI / min_gap;
    let mut best: Option<(f64, Vector3<f64>, f64)> = None;
    for k in 0..=COARSE_STEPS {
        let eta = eta_min + (eta_max - eta_min) * k as f64 / COARSE_STEPS as f64;
        if let Some((coef, sse)) = linear_sinusoid(xs, ys, weights, eta) {
            if best.as_ref().is_none_or(|b| sse < b.2) {
                best = Some((eta, coef, sse));
            }
        }
    }
    let (eta0, coef, _) = best.ok_or_else(|| Error::Calibration("coarse scan found no solvable frequency".into()))?;
    let mut params = Vector4::new(coef[0].hypot(coef[1]), eta0, coef[1].atan2(coef[0]), coef[2]);

    let sse = |p: &Vector4<f64>| -> f64 {
        xs.iter()
            .zip(ys)
            .zip(weights)
            .map(|((&x, &y), w)| w * (p[0] * (p[1] * x + p[2]).sin() + p[3] - y).powi(2))
            .sum()
    };

    let mut lambda = 1e-3;
    let mut current = sse(&params);
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut jtj = Matrix4::<f64>::zeros();
        let mut jtr = Vector4::<f64>::zeros();
        for ((&x, &y), &w) in xs.iter().zip(ys).zip(weights) {
            let arg = params[1] * x + params[2];
            let (s, c) = arg.sin_cos();
            let r = params[0] * s + params[3] - y;
            let j = Vector4::new(s, params[0] * x * c, params[0] * c, 1.0);
            jtj += w * j * j.transpose();
            jtr += w * j * r;
        }
        let mut accepted = None;
        for _ in 0..30 {
            let mut damped = jtj;
            for d in 0..4 {
                damped[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
            }
            let Some(step) = damped.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = params + step;
            let trial_sse = sse(&trial);
            if trial_sse <= current {
                accepted = Some((trial, trial_sse, step));
                lambda = (lambda * 0.3).max(1e-15);
                break;
            }
            lambda *= 10.0;
        }
        let Some((next, next_sse, step)) = accepted else {
            break;
        };
        params = next;
        current = next_sse;
        if step.amax() < STEP_TOLERANCE {
            break;
        }
    }

    let (mut a, mut eta, mut phase, c) = (params[0], params[1], params[2], params[3]);
    if eta < 0.0 {
        eta = -eta;
        phase = -phase;
        a = -a;
    }
    if a < 0.0 {
        a = -a;
        phase += PI;
    }
    phase = PI - (PI - phase).rem_euclid(2.0 * PI);

    let model = ExcitationModel { eta, a, c, phase };
    let rss: f64 = xs.iter().zip(ys).map(|(&x, &y)| (model.evaluate(x) - y).powi(2)).sum();
    Ok(SinusoidFit {
        model,
        residual: (rss / n).sqrt(),
        iterations,
    })
}

/// Exact weighted least squares for `p·sin(ηx) + q·cos(ηx) + c` at fixed η.
fn linear_sinusoid(xs: &[f64], ys: &[f64], weights: &[f64], eta: f64) -> Option<(Vector3<f64>, f64)> {
    let mut ata = Matrix3::<f64>::zeros();
    let mut aty = Vector3::<f64>::zeros();
    for ((&x, &y), &w) in xs.iter().zip(ys).zip(weights) {
        let (s, c) = (eta * x).sin_cos();
        let row = Vector3::new(s, c, 1.0);
        ata += w * row * row.transpose();
        aty += w * row * y;
    }
    let coef = ata.lu().solve(&aty)?;
    if coef.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let sse = xs
        .iter()
        .zip(ys)
        .zip(weights)
        .map(|((&x, &y), w)| {
            let (s, c) = (eta * x).sin_cos();
            w * (coef[0] * s + coef[1] * c + coef[2] - y).powi(2)
        })
        .sum();
    Some((coef, sse))
}

/// Slack on "the grid covers one full oscillation".
const PERIOD_SLACK: f64 = 1.1;

#[derive(Debug, Clone, PartialEq)]
pub struct RabiScan {
    pub amplitudes: Vec<f64>,
    pub measured: Vec<f64>,
    pub result: CalibrationResult,
}

/// Simulated Rabi experiment: measures `P(|1⟩)` at each drive amplitude
/// (exactly when `shots` is `None`, otherwise from that many shots per
/// point) and fits the excitation sinusoid. The π amplitude is half the
/// fitted period.
pub fn rabi_experiment(amplitude_grid: &[f64], shots: Option<u32>, seed: u64) -> Result<CalibrationResult> {
    rabi_scan(amplitude_grid, shots, seed).map(|scan| scan.result)
}

pub fn rabi_scan(amplitude_grid: &[f64], shots: Option<u32>, seed: u64) -> Result<RabiScan> {
    let mut rng = seeded(seed);
    let measured = amplitude_grid
        .iter()
        .map(|&amp| {
            let p = qubit::probability_excited(amp)?;
            match shots {
                None => Ok(p),
                Some(s) => qubit::sample_shots_with(p, s, &mut rng).map(|r| r.estimate),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let result = match shots {
        None => fit_rabi(amplitude_grid, &measured)?,
        Some(s) => fit_rabi_shots(amplitude_grid, &measured, s)?,
    };
    Ok(RabiScan {
        amplitudes: amplitude_grid.to_vec(),
        measured,
        result,
    })
}

/// Fits measured Rabi data and converts the fit into a calibration.
pub fn fit_rabi(amplitudes: &[f64], measured: &[f64]) -> Result<CalibrationResult> {
    let fit = fit_sinusoid(amplitudes, measured)?;
    rabi_calibration(amplitudes, fit)
}

const REWEIGHT_ROUNDS: usize = 3;

/// [`fit_rabi`] for shot-estimated probabilities. Binomial noise is far
/// smaller near 0 and 1 than at 0.5, so the fit is reweighted by the
/// inverse variance `N / (m(1−m))` of the current model `m`, with `m`
/// kept at least half a count away from 0 and 1.
pub fn fit_rabi_shots(amplitudes: &[f64], measured: &[f64], shots: u32) -> Result<CalibrationResult> {
    if shots == 0 {
        return Err(Error::Usage("shots must be at least 1".into()));
    }
    let n = f64::from(shots);
    let floor = 0.5 / n;
    let mut fit = fit_sinusoid(amplitudes, measured)?;
    for _ in 0..REWEIGHT_ROUNDS {
        let weights: Vec<f64> = amplitudes
            .iter()
            .map(|&x| {
                let m = fit.model.evaluate(x).clamp(floor, 1.0 - floor);
                n / (m * (1.0 - m))
            })
            .collect();
        fit = fit_sinusoid_weighted(amplitudes, measured, &weights)?;
    }
    rabi_calibration(amplitudes, fit)
}

fn rabi_calibration(amplitudes: &[f64], fit: SinusoidFit) -> Result<CalibrationResult> {
    let span = amplitudes.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - amplitudes.iter().cloned().fold(f64::INFINITY, f64::min);
    let period = 2.0 * fit.model.half_period();
    if period > PERIOD_SLACK * span {
        return Err(Error::Calibration(format!(
            "fitted period {period:.4} exceeds the scanned span {span:.4}; extend the amplitude grid"
        )));
    }
    if fit.model.a < 1e-6 {
        return Err(Error::Calibration("fitted oscillation amplitude is zero".into()));
    }
    let result = CalibrationResult {
        resonant_frequency_hz: None,
        pi_amplitude: fit.model.half_period(),
        fit: fit.model,
        residual: fit.residual,
    };
    result.validate()?;
    Ok(result)
}

/// `[start, start+step, …]` up to and including `stop` (within half a step).
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step + 0.5).floor() as usize + 1;
    (0..count).map(|k| start + k as f64 * step).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn envelope_points() {
        let p = GaussianPulse {
            amplitude: 0.8,
            frequency_hz: 5e9,
            center_s: 2.0,
            width_s: 0.5,
        };
        assert_eq!(p.envelope(2.0), 0.8);
        assert_abs_diff_eq!(p.envelope(2.5), 0.8 * (-0.5f64).exp(), epsilon = 1e-15);
        assert_eq!(p.envelope(1e6), 0.0);
        assert_eq!(p.envelope(-1e6), 0.0);
    }

    #[test]
    fn envelope_symmetric_and_monotone() {
        let p = GaussianPulse::default();
        let mut prev = p.envelope(p.center_s);
        for k in 1..50 {
            let dt = k as f64 * p.width_s / 10.0;
            let right = p.envelope(p.center_s + dt);
            let left = p.envelope(p.center_s - dt);
            assert_abs_diff_eq!(right, left, epsilon = 1e-15);
            assert!(right <= prev);
            prev = right;
        }
    }

    #[test]
    fn invalid_width_rejected() {
        let p = GaussianPulse {
            width_s: 0.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn train_requires_pulses() {
        assert!(PulseTrain::new(vec![], GaussianPulse::default()).is_err());
        let t = PulseTrain::new(vec![0.5, 0.5], GaussianPulse::default()).unwrap();
        let z = t.play();
        assert_abs_diff_eq!(z[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(z[1], 1.0, epsilon = 1e-15);
        assert_eq!(t.pulses().map(|p| p.amplitude).collect::<Vec<_>>(), vec![0.5, 0.5]);
    }

    fn mhz_grid(center: f64, half: i32, step: f64) -> Vec<f64> {
        (-half..=half).map(|k| center + f64::from(k) * step).collect()
    }

    #[test]
    fn sweep_on_grid_is_exact() {
        let grid = mhz_grid(4.97e9, 50, 1e6);
        let r = frequency_sweep(4.97e9, &grid, 0.0, 1).unwrap();
        assert_eq!(r.resonant_frequency_hz, 4.97e9);
        let r = frequency_sweep(4.96e9, &grid, 0.0, 1).unwrap();
        assert_eq!(r.resonant_frequency_hz, 4.96e9);
    }

    #[test]
    fn sweep_between_grid_points() {
        let grid = mhz_grid(4.97e9, 50, 1e6);
        let truth = 4.97e9 + 0.5e6;
        let r = frequency_sweep(truth, &grid, 0.0, 1).unwrap();
        assert!((r.resonant_frequency_hz - truth).abs() <= 0.5e6);
        let truth = 4.97e9 + 0.3e6;
        let r = frequency_sweep(truth, &grid, 0.0, 1).unwrap();
        assert!((r.resonant_frequency_hz - truth).abs() <= 0.5e6);
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        assert!(matches!(frequency_sweep(1.0, &[], 0.0, 0), Err(Error::Usage(_))));
        assert!(matches!(
            frequency_sweep(1.0, &[2.0, 1.0], 0.0, 0),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn noiseless_rabi() {
        let grid = linear_grid(0.0, 2.0, 0.05);
        assert_eq!(grid.len(), 41);
        let cal = rabi_experiment(&grid, None, 0).unwrap();
        assert_abs_diff_eq!(cal.pi_amplitude, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(cal.fit.a, 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(cal.fit.c, 0.5, epsilon = 1e-6);
        assert!(cal.residual < 1e-9);
    }

    #[test]
    fn shot_noise_rabi() {
        let grid = linear_grid(0.0, 2.0, 0.05);
        let cal = rabi_experiment(&grid, Some(1024), 77).unwrap();
        assert_abs_diff_eq!(cal.pi_amplitude, 1.0, epsilon = 0.01);
    }

    #[test]
    fn constant_data_is_calibration_error() {
        let grid = linear_grid(0.0, 2.0, 0.05);
        let zeros = vec![0.0; grid.len()];
        assert!(matches!(fit_rabi(&grid, &zeros), Err(Error::Calibration(_))));
    }

    #[test]
    fn short_grid_is_calibration_error() {
        let grid = linear_grid(0.0, 0.6, 0.05);
        assert!(matches!(rabi_experiment(&grid, None, 0), Err(Error::Calibration(_))));
        assert!(matches!(
            rabi_experiment(&[0.0, 0.5, 1.0], None, 0),
            Err(Error::Calibration(_))
        ));
    }

    #[test]
    fn fit_recovers_phase() {
        let truth = ExcitationModel {
            eta: 2.3,
            a: 0.7,
            c: 0.1,
            phase: -1.2,
        };
        let xs = linear_grid(0.0, 10.0, 0.05);
        let ys: Vec<f64> = xs.iter().map(|&x| truth.evaluate(x)).collect();
        let fit = fit_sinusoid(&xs, &ys).unwrap();
        assert_abs_diff_eq!(fit.model.eta, truth.eta, epsilon = 1e-8);
        assert_abs_diff_eq!(fit.model.a, truth.a, epsilon = 1e-8);
        assert_abs_diff_eq!(fit.model.c, truth.c, epsilon = 1e-8);
        assert_abs_diff_eq!(fit.model.phase, truth.phase, epsilon = 1e-8);
    }

    #[test]
    fn calibration_json_shape() {
        let cal = CalibrationResult {
            resonant_frequency_hz: Some(4.97e9),
            pi_amplitude: 1.0,
            fit: ExcitationModel::default(),
            residual: 0.0,
        };
        let v: serde_json::Value = serde_json::to_value(&cal).unwrap();
        for key in ["resonant_frequency_hz", "pi_amplitude", "fit", "residual"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        for key in ["eta", "a", "c"] {
            assert!(v["fit"].get(key).is_some(), "{key}");
        }
    }
}
