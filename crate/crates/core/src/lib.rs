//! Simulation and training of pulsed single-qubit feed-forward blocks.
//!
//! A block drives one qubit with a train of `n` amplitude-modulated pulses.
//! Each pulse rotates the state further around the Bloch sphere, so the
//! measured excitation probability after pulse `i` is
//! `sin²(Σ_{j≤i} (⟨w_j, x⟩ + b_j))`: a layer of `n` sine-squared neurons
//! coupled through a cumulative phase. Blocks chain into circuits that are
//! trained classically and exported as chunked pulse schedules.
//!
//! Module map:
//!
//! - [`qubit`]: state, pulse rotation, measurement probability, shot and I/Q emulation
//! - [`pulse`]: Gaussian pulses, trains, frequency sweep and Rabi calibration
//! - [`block`]: the pulsed block forward and backward passes
//! - [`circuit`]: block composition and output heads
//! - [`training`]: losses, optimizers, training loop and evaluation
//! - [`datasets`]: XOR, delimited-file ingestion, normalization and splits
//! - [`schedule`]: pulse-schedule compilation, simulation and verification
//! - [`experiment`]: end-to-end experiment runners used by the CLI
//!
//! Stochastic code draws from [`rng::SeededRng`] (ChaCha8 seeded from a
//! `u64`), so every run is reproducible bit for bit.

pub mod block;
pub mod circuit;
pub mod datasets;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod plot;
pub mod pulse;
pub mod qubit;
pub mod rng;
pub mod schedule;
pub mod training;

pub use block::{BlockGradient, BlockTrace, PerthroBlock};
pub use circuit::{Circuit, CircuitTrace, Head, HeadOutput, Prediction};
pub use datasets::Dataset;
pub use error::{Error, Result};
pub use exec::Execution;
pub use pulse::{CalibrationResult, ExcitationModel, GaussianPulse, PulseTrain};
pub use qubit::{MeasurementConfig, QubitState};
pub use schedule::PulseSchedule;
pub use training::{LossKind, Optimizer, TrainConfig, TrainReport};
