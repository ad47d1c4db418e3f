//! Chains of pulsed blocks with a classical head stage.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::block::{BlockGradient, BlockTrace, PerthroBlock};
use crate::error::{Error, Result};

/// Output stage applied to the last block's probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Head {
    /// Two-output rule: class 0 iff `z₁ ≥ first_at_least` and
    /// `z₂ ≤ second_at_most`, otherwise 1.
    Threshold {
        first_at_least: f64,
        second_at_most: f64,
    },
    Softmax {
        num_classes: usize,
    },
    /// Raw probabilities are the prediction.
    Identity,
}

impl Head {
    pub fn xor() -> Self {
        Head::Threshold {
            first_at_least: 0.5,
            second_at_most: 0.5,
        }
    }

    pub fn apply(&self, z: &[f64]) -> HeadOutput {
        match *self {
            Head::Threshold {
                first_at_least,
                second_at_most,
            } => HeadOutput {
                prediction: Prediction::Binary(threshold_rule(z, first_at_least, second_at_most)),
                probabilities: None,
            },
            Head::Softmax { .. } => softmax_head(z),
            Head::Identity => HeadOutput {
                prediction: Prediction::Values(z.to_vec()),
                probabilities: None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prediction {
    Class(usize),
    Binary(u8),
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadOutput {
    pub prediction: Prediction,
    pub probabilities: Option<Vec<f64>>,
}

impl HeadOutput {
    /// Predicted class for thresholded or softmax heads.
    pub fn class(&self) -> Option<usize> {
        match self.prediction {
            Prediction::Class(c) => Some(c),
            Prediction::Binary(b) => Some(usize::from(b)),
            Prediction::Values(_) => None,
        }
    }
}

fn threshold_rule(z: &[f64], first_at_least: f64, second_at_most: f64) -> u8 {
    if z[0] >= first_at_least && z[1] <= second_at_most {
        0
    } else {
        1
    }
}

/// XOR decision rule on the two measured probabilities, thresholds at 0.5
/// (inclusive on both sides).
pub fn xor_head(z: [f64; 2]) -> u8 {
    threshold_rule(&z, 0.5, 0.5)
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

pub fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > values[best] { i } else { best })
}

pub fn softmax_head(z: &[f64]) -> HeadOutput {
    let p = softmax(z);
    HeadOutput {
        prediction: Prediction::Class(argmax(&p)),
        probabilities: Some(p),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CircuitRepr", into = "CircuitRepr")]
pub struct Circuit {
    blocks: Vec<PerthroBlock>,
    head: Head,
}

#[derive(Serialize, Deserialize)]
struct CircuitRepr {
    blocks: Vec<PerthroBlock>,
    head: Head,
}

impl TryFrom<CircuitRepr> for Circuit {
    type Error = Error;

    fn try_from(r: CircuitRepr) -> Result<Self> {
        Circuit::new(r.blocks, r.head)
    }
}

impl From<Circuit> for CircuitRepr {
    fn from(c: Circuit) -> Self {
        CircuitRepr {
            blocks: c.blocks,
            head: c.head,
        }
    }
}

impl Circuit {
    pub fn new(blocks: Vec<PerthroBlock>, head: Head) -> Result<Self> {
        let Some(last) = blocks.last() else {
            return Err(Error::Usage("a circuit needs at least one block".into()));
        };
        for (k, pair) in blocks.windows(2).enumerate() {
            if pair[0].pulses() != pair[1].inputs() {
                return Err(Error::Usage(format!(
                    "block {k} emits {} values but block {} expects {}",
                    pair[0].pulses(),
                    k + 1,
                    pair[1].inputs()
                )));
            }
        }
        match head {
            Head::Threshold { .. } if last.pulses() != 2 => {
                return Err(Error::Usage(format!(
                    "threshold head needs a 2-pulse final block, got {}",
                    last.pulses()
                )))
            }
            Head::Softmax { num_classes } if last.pulses() != num_classes => {
                return Err(Error::Usage(format!(
                    "softmax head over {num_classes} classes needs a {num_classes}-pulse final block, got {}",
                    last.pulses()
                )))
            }
            _ => {}
        }
        Ok(Circuit { blocks, head })
    }

    /// Randomly initialised circuit on `inputs` features with the given
    /// pulse counts per block.
    pub fn random<R: Rng + ?Sized>(
        inputs: usize,
        pulses: &[usize],
        head: Head,
        scale: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let mut blocks = Vec::with_capacity(pulses.len());
        let mut d = inputs;
        for &n in pulses {
            blocks.push(PerthroBlock::random(n, d, scale, rng)?);
            d = n;
        }
        Circuit::new(blocks, head)
    }

    pub fn blocks(&self) -> &[PerthroBlock] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [PerthroBlock] {
        &mut self.blocks
    }

    pub fn head(&self) -> &Head {
        &self.head
    }

    pub fn input_dim(&self) -> usize {
        self.blocks[0].inputs()
    }

    pub fn output_dim(&self) -> usize {
        self.blocks[self.blocks.len() - 1].pulses()
    }

    /// One qubit per block regardless of pulse count.
    pub fn qubit_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn pulse_count(&self) -> usize {
        self.blocks.iter().map(PerthroBlock::pulses).sum()
    }

    pub fn count_parameters(&self) -> usize {
        self.blocks.iter().map(PerthroBlock::parameter_count).sum()
    }

    pub fn forward(&self, x: &[f64]) -> Result<CircuitTrace> {
        if x.len() != self.input_dim() {
            return Err(Error::Usage(format!(
                "circuit expects {} inputs, got {}",
                self.input_dim(),
                x.len()
            )));
        }
        let mut traces: Vec<BlockTrace> = Vec::with_capacity(self.blocks.len());
        for block in &self.blocks {
            let input = traces.last().map_or(x, |t| t.output.as_slice());
            let trace = block.forward(input)?;
            traces.push(trace);
        }
        Ok(CircuitTrace { traces })
    }

    pub fn predict(&self, x: &[f64]) -> Result<HeadOutput> {
        let trace = self.forward(x)?;
        Ok(self.head.apply(trace.output()))
    }

    /// Chains block backward passes from `upstream = ∂L/∂z_final`.
    pub fn backward(&self, trace: &CircuitTrace, upstream: &[f64]) -> Result<CircuitGradient> {
        if trace.traces.len() != self.blocks.len() {
            return Err(Error::Usage("trace does not match circuit depth".into()));
        }
        let mut grads = Vec::with_capacity(self.blocks.len());
        let mut carry = upstream.to_vec();
        for (block, bt) in self.blocks.iter().zip(&trace.traces).rev() {
            let g = block.backward(bt, &bt.input, &carry)?;
            carry = g.input.clone();
            grads.push(g);
        }
        grads.reverse();
        Ok(CircuitGradient { blocks: grads })
    }

    /// Parameters flattened block by block as `[weights…, biases…]`.
    pub fn flat_parameters(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .flat_map(|b| b.weights().iter().chain(b.biases()).copied())
            .collect()
    }

    pub fn set_flat_parameters(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.count_parameters() {
            return Err(Error::Usage(format!(
                "expected {} parameters, got {}",
                self.count_parameters(),
                flat.len()
            )));
        }
        let mut offset = 0;
        for block in &mut self.blocks {
            let (w, b) = block.parameters_mut();
            w.copy_from_slice(&flat[offset..offset + w.len()]);
            offset += w.len();
            b.copy_from_slice(&flat[offset..offset + b.len()]);
            offset += b.len();
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

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitTrace {
    pub traces: Vec<BlockTrace>,
}

impl CircuitTrace {
    pub fn output(&self) -> &[f64] {
        &self.traces[self.traces.len() - 1].output
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitGradient {
    pub blocks: Vec<BlockGradient>,
}

impl CircuitGradient {
    /// Same layout as [`Circuit::flat_parameters`].
    pub fn flatten(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .flat_map(|g| g.weights.iter().chain(&g.biases).copied())
            .collect()
    }

    /// `∂L/∂x` for the circuit input.
    pub fn input(&self) -> &[f64] {
        &self.blocks[0].input
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn xor_circuit() -> Circuit {
        let b = PerthroBlock::from_rows(
            &[vec![FRAC_PI_2, FRAC_PI_2], vec![0.0, 0.0]],
            vec![FRAC_PI_2, FRAC_PI_2],
        )
        .unwrap();
        Circuit::new(vec![b], Head::xor()).unwrap()
    }

    #[test]
    fn xor_head_rule() {
        assert_eq!(xor_head([1.0, 0.0]), 0);
        assert_eq!(xor_head([0.0, 1.0]), 1);
        assert_eq!(xor_head([0.5, 0.5]), 0);
        assert_eq!(xor_head([0.49, 0.2]), 1);
        assert_eq!(xor_head([0.9, 0.51]), 1);
    }

    #[test]
    fn xor_truth_table() {
        let c = xor_circuit();
        for (x, y) in [([0.0, 0.0], 0), ([0.0, 1.0], 1), ([1.0, 0.0], 1), ([1.0, 1.0], 0)] {
            assert_eq!(c.predict(&x).unwrap().class(), Some(y));
        }
        let z = c.forward(&[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(z.output()[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(z.output()[1], 1.0, epsilon = 1e-15);
        assert_eq!(c.qubit_count(), 1);
        assert_eq!(c.pulse_count(), 2);
    }

    #[test]
    fn softmax_examples() {
        let h = softmax_head(&[0.0, 0.0, 0.0]);
        for p in h.probabilities.unwrap() {
            assert_abs_diff_eq!(p, 1.0 / 3.0, epsilon = 1e-15);
        }
        assert_eq!(softmax_head(&[1.0, 0.0, 0.0]).class(), Some(0));
        let a = softmax(&[0.2, 0.7, 0.1]);
        let b = softmax(&[1000.2, 1000.7, 1000.1]);
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(a.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn parameter_counts() {
        let mut rng = seeded(0);
        let xor = Circuit::random(2, &[2], Head::xor(), 0.5, &mut rng).unwrap();
        assert_eq!(xor.count_parameters(), 6);
        let iris = Circuit::random(4, &[6, 12, 3], Head::Softmax { num_classes: 3 }, 0.5, &mut rng).unwrap();
        assert_eq!(iris.count_parameters(), 153);
        assert_eq!(iris.qubit_count(), 3);
        let single = Circuit::random(12, &[1], Head::Identity, 0.5, &mut rng).unwrap();
        assert_eq!(single.count_parameters(), 13);
    }

    #[test]
    fn zero_block_circuit() {
        let c = Circuit::new(vec![PerthroBlock::zeros(3, 4).unwrap()], Head::Identity).unwrap();
        assert_eq!(c.forward(&[1.0, 2.0, 3.0, 4.0]).unwrap().output(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn chained_outputs_in_unit_interval() {
        let mut rng = seeded(5);
        let c = Circuit::random(2, &[3, 2], Head::Identity, 3.0, &mut rng).unwrap();
        for x in [[0.0, 0.0], [1.0, -2.0], [10.0, 3.5]] {
            assert!(c.forward(&x).unwrap().output().iter().all(|z| (0.0..=1.0).contains(z)));
        }
    }

    #[test]
    fn rejects_bad_topologies() {
        let a = PerthroBlock::zeros(3, 2).unwrap();
        let b = PerthroBlock::zeros(2, 4).unwrap();
        assert!(Circuit::new(vec![a.clone(), b], Head::Identity).is_err());
        assert!(Circuit::new(vec![a.clone()], Head::xor()).is_err());
        assert!(Circuit::new(vec![a.clone()], Head::Softmax { num_classes: 2 }).is_err());
        assert!(Circuit::new(vec![], Head::Identity).is_err());
        assert!(Circuit::new(vec![a], Head::Softmax { num_classes: 3 }).is_ok());
    }

    #[test]
    fn input_dimension_checked() {
        assert!(matches!(xor_circuit().forward(&[1.0]), Err(Error::Usage(_))));
    }

    #[test]
    fn json_round_trip() {
        let mut rng = seeded(11);
        let c = Circuit::random(4, &[6, 12, 3], Head::Softmax { num_classes: 3 }, 0.5, &mut rng).unwrap();
        let text = c.to_json().unwrap();
        let back = Circuit::from_json(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_json().unwrap(), text);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["head"]["kind"], "softmax");
        assert_eq!(v["head"]["params"]["num_classes"], 3);
        assert_eq!(v["blocks"][1]["n"], 12);
    }

    #[test]
    fn flat_parameters_round_trip() {
        let mut rng = seeded(3);
        let mut c = Circuit::random(3, &[4, 2], Head::Identity, 1.0, &mut rng).unwrap();
        let mut p = c.flat_parameters();
        p[0] = 42.0;
        c.set_flat_parameters(&p).unwrap();
        assert_eq!(c.blocks()[0].weights()[0], 42.0);
        assert_eq!(c.flat_parameters(), p);
        assert!(c.set_flat_parameters(&p[1..]).is_err());
    }
}
