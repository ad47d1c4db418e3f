//! The pulsed block: one qubit, `n` amplitude-modulated pulses.
//!
//! Pulse `i` carries the pre-activation `s_i = ⟨w_i, x⟩ + b_i` and the
//! qubit accumulates rotation across the train, so output `i` is
//! `z_i = sin²(S_i)` with `S_i = Σ_{j≤i} s_j`. Equivalently
//! `z_i = sin²(s_i + ρ_i)` where `ρ_i = S_{i−1}` (and `ρ_1 = 0`) is the
//! cumulative phase carried in from earlier pulses.

use std::f64::consts::FRAC_2_PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubit::QubitState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BlockRepr", into = "BlockRepr")]
pub struct PerthroBlock {
    pulses: usize,
    inputs: usize,
    /// Row-major `pulses × inputs`.
    weights: Vec<f64>,
    biases: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct BlockRepr {
    n: usize,
    d: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
}

impl TryFrom<BlockRepr> for PerthroBlock {
    type Error = Error;

    fn try_from(r: BlockRepr) -> Result<Self> {
        PerthroBlock::new(r.n, r.d, r.weights, r.biases)
    }
}

impl From<PerthroBlock> for BlockRepr {
    fn from(b: PerthroBlock) -> Self {
        BlockRepr {
            n: b.pulses,
            d: b.inputs,
            weights: b.weights,
            biases: b.biases,
        }
    }
}

impl PerthroBlock {
    pub fn new(pulses: usize, inputs: usize, weights: Vec<f64>, biases: Vec<f64>) -> Result<Self> {
        if pulses == 0 || inputs == 0 {
            return Err(Error::Usage(format!(
                "block needs n ≥ 1 and d ≥ 1, got n = {pulses}, d = {inputs}"
            )));
        }
        if weights.len() != pulses * inputs {
            return Err(Error::Usage(format!(
                "weights have {} entries, expected {pulses}×{inputs}",
                weights.len()
            )));
        }
        if biases.len() != pulses {
            return Err(Error::Usage(format!(
                "biases have {} entries, expected {pulses}",
                biases.len()
            )));
        }
        if weights.iter().chain(&biases).any(|v| !v.is_finite()) {
            return Err(Error::Domain("block parameters must be finite".into()));
        }
        Ok(PerthroBlock {
            pulses,
            inputs,
            weights,
            biases,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], biases: Vec<f64>) -> Result<Self> {
        let inputs = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != inputs) {
            return Err(Error::Usage("weight rows have differing lengths".into()));
        }
        PerthroBlock::new(rows.len(), inputs, rows.concat(), biases)
    }

    pub fn zeros(pulses: usize, inputs: usize) -> Result<Self> {
        PerthroBlock::new(pulses, inputs, vec![0.0; pulses * inputs], vec![0.0; pulses])
    }

    /// Weights uniform in `[−scale, scale]`, biases zero.
    pub fn random<R: Rng + ?Sized>(pulses: usize, inputs: usize, scale: f64, rng: &mut R) -> Result<Self> {
        let weights = (0..pulses * inputs).map(|_| rng.random_range(-scale..=scale)).collect();
        PerthroBlock::new(pulses, inputs, weights, vec![0.0; pulses])
    }

    /// Pulse count `n`.
    pub fn pulses(&self) -> usize {
        self.pulses
    }

    /// Input dimension `d`.
    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.inputs..(i + 1) * self.inputs]
    }

    pub fn parameter_count(&self) -> usize {
        self.pulses * (self.inputs + 1)
    }

    /// Mutable view of weights and biases, in that order.
    pub fn parameters_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.weights, &mut self.biases)
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.inputs {
            return Err(Error::Usage(format!(
                "block expects {} inputs, got {}",
                self.inputs,
                x.len()
            )));
        }
        Ok(())
    }

    /// Per-pulse pre-activations `⟨w_i, x⟩ + b_i`.
    pub fn preactivations(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok((0..self.pulses).map(|i| dot(self.row(i), x) + self.biases[i]).collect())
    }

    /// Raw drive amplitudes `(2/π)(⟨w_i, x⟩ + b_i)`, before accumulation.
    pub fn modulate_amplitudes(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.preactivations(x)?.into_iter().map(|s| FRAC_2_PI * s).collect())
    }

    pub fn forward(&self, x: &[f64]) -> Result<BlockTrace> {
        let pre = self.preactivations(x)?;
        let mut partial_sums = Vec::with_capacity(self.pulses);
        let mut rho = Vec::with_capacity(self.pulses);
        let mut acc = 0.0;
        for s in pre {
            rho.push(acc);
            acc += s;
            partial_sums.push(acc);
        }
        let output = partial_sums.iter().map(|s| s.sin().powi(2)).collect();
        Ok(BlockTrace {
            input: x.to_vec(),
            partial_sums,
            rho,
            output,
        })
    }

    /// Same map as [`forward`](Self::forward), computed by playing the
    /// modulated pulses on a simulated qubit and reading `P(|1⟩)` after each.
    pub fn forward_via_pulse_sim(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut state = QubitState::ground();
        self.modulate_amplitudes(x)?
            .into_iter()
            .map(|a| {
                state = state.apply_pulse(a)?;
                Ok(state.probability_excited())
            })
            .collect()
    }

    /// Gradients of `Σ_i upstream_i · z_i` with respect to the weights,
    /// biases and input.
    ///
    /// `∂z_i/∂s_j = sin(2S_i)` for every `j ≤ i`, so with
    /// `g_i = upstream_i · sin(2S_i)` each pre-activation receives the suffix
    /// sum `G_j = Σ_{i≥j} g_i`. Cost is `O(n·d)`.
    pub fn backward(&self, trace: &BlockTrace, x: &[f64], upstream: &[f64]) -> Result<BlockGradient> {
        self.check_input(x)?;
        if trace.partial_sums.len() != self.pulses || trace.output.len() != self.pulses {
            return Err(Error::Usage(format!(
                "trace has {} pulses but block has {}",
                trace.partial_sums.len(),
                self.pulses
            )));
        }
        if trace.input != x {
            return Err(Error::Usage("trace was recorded for a different input".into()));
        }
        if upstream.len() != self.pulses {
            return Err(Error::Usage(format!(
                "upstream gradient has {} entries, expected {}",
                upstream.len(),
                self.pulses
            )));
        }

        let mut suffix = vec![0.0; self.pulses];
        let mut acc = 0.0;
        for i in (0..self.pulses).rev() {
            acc += upstream[i] * (2.0 * trace.partial_sums[i]).sin();
            suffix[i] = acc;
        }

        let mut weights = vec![0.0; self.weights.len()];
        let mut input = vec![0.0; self.inputs];
        for (j, &g) in suffix.iter().enumerate() {
            let row = self.row(j);
            let out = &mut weights[j * self.inputs..(j + 1) * self.inputs];
            for k in 0..self.inputs {
                out[k] = g * x[k];
                input[k] += g * row[k];
            }
        }
        Ok(BlockGradient {
            weights,
            biases: suffix,
            input,
        })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Forward intermediates kept for the backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTrace {
    pub input: Vec<f64>,
    /// `S_i`, prefix sums of the pre-activations.
    pub partial_sums: Vec<f64>,
    /// Cumulative phase `ρ_i = S_{i−1}`, `ρ_1 = 0`.
    pub rho: Vec<f64>,
    pub output: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockGradient {
    /// Row-major, same layout as the block weights.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub input: Vec<f64>,
}
