//! Losses, optimizers, the training loop and evaluation.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{argmax, softmax, Circuit, Head};
use crate::datasets::Dataset;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::qubit::sample_shots_with;
use crate::rng::{derive_seed, seeded};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// Mean over output dimensions of `(p − t)²`.
    Mse,
    /// `−Σ t_k ln p_k` on softmax probabilities.
    CategoricalCrossEntropy,
}

/// Loss value and its gradient with respect to `prediction`.
pub fn loss(kind: LossKind, prediction: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    if prediction.len() != target.len() || prediction.is_empty() {
        return Err(Error::Usage(format!(
            "prediction has {} entries, target {}",
            prediction.len(),
            target.len()
        )));
    }
    match kind {
        LossKind::Mse => {
            let m = prediction.len() as f64;
            let value = prediction.iter().zip(target).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / m;
            let grad = prediction.iter().zip(target).map(|(p, t)| 2.0 * (p - t) / m).collect();
            Ok((value, grad))
        }
        LossKind::CategoricalCrossEntropy => {
            let ones = target.iter().filter(|&&t| t == 1.0).count();
            if ones != 1 || target.iter().any(|&t| t != 0.0 && t != 1.0) {
                return Err(Error::Usage("cross-entropy targets must be one-hot".into()));
            }
            let value = target
                .iter()
                .zip(prediction)
                .filter(|(t, _)| **t > 0.0)
                .map(|(t, p)| -t * p.ln())
                .sum::<f64>();
            let grad = target
                .iter()
                .zip(prediction)
                .map(|(t, p)| if *t > 0.0 { -t / p } else { 0.0 })
                .collect();
            Ok((value, grad))
        }
    }
}

/// Loss for one sample and its gradient with respect to the final block
/// output `z`. Softmax heads are differentiated through; other heads see
/// the loss applied to `z` directly.
pub fn output_loss(head: &Head, kind: LossKind, z: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    match head {
        Head::Softmax { .. } => {
            let p = softmax(z);
            let (value, gp) = loss(kind, &p, target)?;
            let inner: f64 = p.iter().zip(&gp).map(|(a, b)| a * b).sum();
            let gz = p.iter().zip(&gp).map(|(pk, gk)| pk * (gk - inner)).collect();
            Ok((value, gz))
        }
        _ if kind == LossKind::CategoricalCrossEntropy => {
            Err(Error::Usage("categorical cross-entropy requires a softmax head".into()))
        }
        _ => loss(kind, z, target),
    }
}

/// Loss and flattened parameter gradient for one sample.
pub fn sample_gradient(circuit: &Circuit, kind: LossKind, x: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    let trace = circuit.forward(x)?;
    let (value, upstream) = output_loss(circuit.head(), kind, trace.output(), target)?;
    let grad = circuit.backward(&trace, &upstream)?;
    Ok((value, grad.flatten()))
}

/// Mean loss and mean gradient over `indices`. Per-sample work follows
/// `exec`; the reduction runs in index order so the result is identical in
/// both modes.
pub fn batch_gradient(
    circuit: &Circuit,
    data: &Dataset,
    indices: &[usize],
    kind: LossKind,
    exec: Execution,
) -> Result<(f64, Vec<f64>)> {
    let per_sample = exec.map_slice(indices, |&i| {
        sample_gradient(circuit, kind, &data.features[i], &data.targets[i])
    });
    let mut total = 0.0;
    let mut grad = vec![0.0; circuit.count_parameters()];
    for r in per_sample {
        let (l, g) = r?;
        total += l;
        for (acc, v) in grad.iter_mut().zip(g) {
            *acc += v;
        }
    }
    let n = indices.len().max(1) as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    Ok((total / n, grad))
}

/// Mean loss over the whole dataset.
pub fn dataset_loss(circuit: &Circuit, data: &Dataset, kind: LossKind, exec: Execution) -> Result<f64> {
    let losses = exec.map_indexed(data.len(), |i| {
        let z = circuit.forward(&data.features[i])?;
        output_loss(circuit.head(), kind, z.output(), &data.targets[i]).map(|(l, _)| l)
    });
    let mut total = 0.0;
    for l in losses {
        total += l?;
    }
    Ok(total / data.len().max(1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Optimizer {
    Sgd,
    SgdMomentum { beta: f64 },
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Optimizer {
    pub fn adam() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Initial weights are uniform in `[−init_scale, init_scale]`.
    pub init_scale: f64,
    pub optimizer: Optimizer,
    pub execution: Execution,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            epochs: 100,
            batch_size: 16,
            seed: 0,
            init_scale: 0.5,
            optimizer: Optimizer::adam(),
            execution: Execution::Parallel,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate must be non-negative, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if !(self.init_scale > 0.0 && self.init_scale.is_finite()) {
            return Err(Error::Config(format!(
                "init_scale must be positive, got {}",
                self.init_scale
            )));
        }
        match self.optimizer {
            Optimizer::Sgd => {}
            Optimizer::SgdMomentum { beta } if (0.0..1.0).contains(&beta) => {}
            Optimizer::Adam { beta1, beta2, epsilon }
                if (0.0..1.0).contains(&beta1) && (0.0..1.0).contains(&beta2) && epsilon > 0.0 => {}
            other => return Err(Error::Config(format!("invalid optimizer settings {other:?}"))),
        }
        Ok(())
    }
}

struct OptimizerState {
    kind: Optimizer,
    lr: f64,
    step: i32,
    first: Vec<f64>,
    second: Vec<f64>,
}

impl OptimizerState {
    fn new(kind: Optimizer, lr: f64, size: usize) -> Self {
        OptimizerState {
            kind,
            lr,
            step: 0,
            first: vec![0.0; size],
            second: vec![0.0; size],
        }
    }

    fn update(&mut self, params: &mut [f64], grad: &[f64]) {
        self.step += 1;
        match self.kind {
            Optimizer::Sgd => {
                for (p, g) in params.iter_mut().zip(grad) {
                    *p -= self.lr * g;
                }
            }
            Optimizer::SgdMomentum { beta } => {
                for ((p, g), v) in params.iter_mut().zip(grad).zip(&mut self.first) {
                    *v = beta * *v + g;
                    *p -= self.lr * *v;
                }
            }
            Optimizer::Adam { beta1, beta2, epsilon } => {
                let c1 = 1.0 - beta1.powi(self.step);
                let c2 = 1.0 - beta2.powi(self.step);
                for (k, (p, g)) in params.iter_mut().zip(grad).enumerate() {
                    self.first[k] = beta1 * self.first[k] + (1.0 - beta1) * g;
                    self.second[k] = beta2 * self.second[k] + (1.0 - beta2) * g * g;
                    let m = self.first[k] / c1;
                    let v = self.second[k] / c2;
                    *p -= self.lr * m / (v.sqrt() + epsilon);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub initial_loss: f64,
    /// Training-set loss after each epoch.
    pub loss: Vec<f64>,
    /// Training-set accuracy after each epoch (classification only).
    pub accuracy: Option<Vec<f64>>,
    pub validation_loss: Option<Vec<f64>>,
    pub validation_accuracy: Option<Vec<f64>>,
    pub final_test_metric: Option<f64>,
    pub wall_clock_seconds: f64,
}

impl TrainReport {
    pub fn final_loss(&self) -> f64 {
        self.loss.last().copied().unwrap_or(self.initial_loss)
    }

    /// `epoch,loss,accuracy` (plus validation columns when recorded).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["epoch", "loss", "accuracy"];
        if self.validation_loss.is_some() {
            header.extend(["validation_loss", "validation_accuracy"]);
        }
        w.write_record(&header)?;
        let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for (e, l) in self.loss.iter().enumerate() {
            let mut row = vec![
                (e + 1).to_string(),
                l.to_string(),
                fmt(self.accuracy.as_ref().map(|a| a[e])),
            ];
            if let Some(vl) = &self.validation_loss {
                row.push(vl[e].to_string());
                row.push(fmt(self.validation_accuracy.as_ref().map(|a| a[e])));
            }
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(f)
    }
}

fn check_data(circuit: &Circuit, data: &Dataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::Usage("training set is empty".into()));
    }
    data.validate()?;
    if data.feature_dim() != circuit.input_dim() {
        return Err(Error::Usage(format!(
            "dataset has {} features, circuit expects {}",
            data.feature_dim(),
            circuit.input_dim()
        )));
    }
    if data.target_dim() != circuit.output_dim() {
        return Err(Error::Usage(format!(
            "dataset targets have {} entries, circuit emits {}",
            data.target_dim(),
            circuit.output_dim()
        )));
    }
    Ok(())
}

pub fn train(circuit: &Circuit, data: &Dataset, kind: LossKind, cfg: &TrainConfig) -> Result<(Circuit, TrainReport)> {
    train_with_validation(circuit, data, None, kind, cfg)
}

/// Mini-batch gradient descent from the given parameters. Each epoch
/// reshuffles with a stream derived from `cfg.seed` and the epoch index;
/// losses and accuracies are measured on the full sets after the epoch.
pub fn train_with_validation(
    circuit: &Circuit,
    data: &Dataset,
    validation: Option<&Dataset>,
    kind: LossKind,
    cfg: &TrainConfig,
) -> Result<(Circuit, TrainReport)> {
    cfg.validate()?;
    check_data(circuit, data)?;
    if let Some(v) = validation {
        check_data(circuit, v)?;
    }
    let start = Instant::now();
    let exec = cfg.execution;
    let mut model = circuit.clone();
    let mut params = model.flat_parameters();
    let mut opt = OptimizerState::new(cfg.optimizer, cfg.learning_rate, params.len());

    let initial_loss = dataset_loss(&model, data, kind, exec)?;
    if !initial_loss.is_finite() {
        return Err(Error::Training {
            epoch: 0,
            message: format!("initial loss is {initial_loss}"),
        });
    }

    let classification = data.is_classification();
    let mut losses = Vec::with_capacity(cfg.epochs);
    let mut accuracy = classification.then(|| Vec::with_capacity(cfg.epochs));
    let mut val_losses = validation.map(|_| Vec::with_capacity(cfg.epochs));
    let mut val_accuracy = validation
        .filter(|v| v.is_classification())
        .map(|_| Vec::with_capacity(cfg.epochs));

    let mut order: Vec<usize> = (0..data.len()).collect();
    for epoch in 1..=cfg.epochs {
        let mut rng = seeded(derive_seed(cfg.seed, epoch as u64));
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let (_, grad) = batch_gradient(&model, data, batch, kind, exec)?;
            opt.update(&mut params, &grad);
            if params.iter().any(|p| !p.is_finite()) {
                return Err(Error::Training {
                    epoch,
                    message: "parameters became non-finite".into(),
                });
            }
            model.set_flat_parameters(&params)?;
        }
        let l = dataset_loss(&model, data, kind, exec)?;
        if !l.is_finite() {
            return Err(Error::Training {
                epoch,
                message: format!("loss is {l}"),
            });
        }
        losses.push(l);
        if let Some(acc) = accuracy.as_mut() {
            acc.push(evaluate(&model, data, Metric::Accuracy)?);
        }
        if let (Some(v), Some(vl)) = (validation, val_losses.as_mut()) {
            vl.push(dataset_loss(&model, v, kind, exec)?);
            if let Some(va) = val_accuracy.as_mut() {
                va.push(evaluate(&model, v, Metric::Accuracy)?);
            }
        }
    }

    let report = TrainReport {
        initial_loss,
        loss: losses,
        accuracy,
        validation_loss: val_losses,
        validation_accuracy: val_accuracy,
        final_test_metric: None,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((model, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Fraction of samples whose head prediction matches the label.
    Accuracy,
    /// Mean over samples and outputs of the squared error.
    Mse,
}

fn predicted_class(head: &Head, z: &[f64]) -> usize {
    head.apply(z).class().unwrap_or_else(|| argmax(z))
}

fn sample_metric(circuit: &Circuit, data: &Dataset, i: usize, z: &[f64], metric: Metric) -> Result<f64> {
    match metric {
        Metric::Accuracy => {
            let labels = data
                .labels
                .as_ref()
                .ok_or_else(|| Error::Usage("accuracy needs labelled data".into()))?;
            Ok(f64::from(u8::from(predicted_class(circuit.head(), z) == labels[i])))
        }
        Metric::Mse => Ok(loss(LossKind::Mse, z, &data.targets[i])?.0),
    }
}

/// Noiseless metric over every sample.
pub fn evaluate(circuit: &Circuit, data: &Dataset, metric: Metric) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Usage("evaluation set is empty".into()));
    }
    let mut total = 0.0;
    for i in 0..data.len() {
        let z = circuit.forward(&data.features[i])?;
        total += sample_metric(circuit, data, i, z.output(), metric)?;
    }
    Ok(total / data.len() as f64)
}

/// Forward pass in which every block's probabilities are replaced by
/// `shots`-shot estimates before feeding the next block.
pub fn sampled_forward<R: Rng + ?Sized>(circuit: &Circuit, x: &[f64], shots: u32, rng: &mut R) -> Result<Vec<f64>> {
    let mut input = x.to_vec();
    for block in circuit.blocks() {
        let exact = block.forward(&input)?.output;
        input = exact
            .into_iter()
            .map(|p| sample_shots_with(p.clamp(0.0, 1.0), shots, rng).map(|s| s.estimate))
            .collect::<Result<_>>()?;
    }
    Ok(input)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotTrial {
    pub trial: usize,
    pub sample: usize,
    pub measured: Vec<f64>,
    pub label: Option<usize>,
    pub predicted: Option<usize>,
}

/// Monte-Carlo readout: trial `t` evaluates sample `t mod N` under shot
/// noise with its own seeded stream, so trials can run in any order.
pub fn shot_trials(
    circuit: &Circuit,
    data: &Dataset,
    shots: u32,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<ShotTrial>> {
    if data.is_empty() {
        return Err(Error::Usage("evaluation set is empty".into()));
    }
    exec.map_indexed(trials, |t| {
        let i = t % data.len();
        let mut rng = seeded(derive_seed(seed, t as u64));
        let measured = sampled_forward(circuit, &data.features[i], shots, &mut rng)?;
        let predicted = data.labels.as_ref().map(|_| predicted_class(circuit.head(), &measured));
        Ok(ShotTrial {
            trial: t,
            sample: i,
            label: data.labels.as_ref().map(|l| l[i]),
            predicted,
            measured,
        })
    })
    .into_iter()
    .collect()
}

/// Metric averaged over `trials` shot-noise trials.
pub fn evaluate_with_shots(
    circuit: &Circuit,
    data: &Dataset,
    metric: Metric,
    shots: u32,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<f64> {
    let results = shot_trials(circuit, data, shots, trials, seed, exec)?;
    let mut total = 0.0;
    for r in &results {
        total += sample_metric(circuit, data, r.sample, &r.measured, metric)?;
    }
    Ok(total / results.len().max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::PerthroBlock;
    use crate::datasets::xor_dataset;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn xor_solution() -> Circuit {
        let b = PerthroBlock::from_rows(
            &[vec![FRAC_PI_2, FRAC_PI_2], vec![0.0, 0.0]],
            vec![FRAC_PI_2, FRAC_PI_2],
        )
        .unwrap();
        Circuit::new(vec![b], Head::xor()).unwrap()
    }

    #[test]
    fn mse_examples() {
        let (v, g) = loss(LossKind::Mse, &[0.3, 0.7], &[0.3, 0.7]).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(g, vec![0.0, 0.0]);
        let (v, g) = loss(LossKind::Mse, &[0.5], &[1.0]).unwrap();
        assert_abs_diff_eq!(v, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(g[0], -1.0, epsilon = 1e-15);
    }

    #[test]
    fn cross_entropy_examples() {
        let (v, _) = loss(LossKind::CategoricalCrossEntropy, &[0.0, 1.0, 0.0], &[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(v, 0.0);
        let (v, g) = loss(LossKind::CategoricalCrossEntropy, &[0.25, 0.5, 0.25], &[0.0, 1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(v, 2f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(g[1], -2.0, epsilon = 1e-15);
        assert!(matches!(
            loss(LossKind::CategoricalCrossEntropy, &[0.5, 0.5], &[0.5, 0.5]),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn shape_mismatch() {
        assert!(matches!(loss(LossKind::Mse, &[0.1, 0.2], &[0.1]), Err(Error::Usage(_))));
    }

    #[test]
    fn softmax_cross_entropy_gradient_is_p_minus_t() {
        let z = [0.2, 0.9, 0.4];
        let t = [0.0, 0.0, 1.0];
        let (_, g) = output_loss(
            &Head::Softmax { num_classes: 3 },
            LossKind::CategoricalCrossEntropy,
            &z,
            &t,
        )
        .unwrap();
        let p = softmax(&z);
        for k in 0..3 {
            assert_abs_diff_eq!(g[k], p[k] - t[k], epsilon = 1e-15);
        }
    }

    #[test]
    fn cross_entropy_needs_softmax() {
        assert!(matches!(
            output_loss(&Head::Identity, LossKind::CategoricalCrossEntropy, &[0.5], &[1.0]),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn zero_learning_rate_keeps_parameters() {
        let mut rng = seeded(1);
        let c = Circuit::random(2, &[2], Head::xor(), 0.5, &mut rng).unwrap();
        let cfg = TrainConfig {
            learning_rate: 0.0,
            epochs: 5,
            batch_size: 2,
            ..Default::default()
        };
        let (trained, report) = train(&c, &xor_dataset(), LossKind::Mse, &cfg).unwrap();
        assert_eq!(trained, c);
        assert_eq!(report.loss.len(), 5);
        for l in &report.loss {
            assert_eq!(*l, report.initial_loss);
        }
        assert_eq!(report.accuracy.as_ref().unwrap().len(), 5);
    }

    #[test]
    fn divergence_reports_epoch() {
        let b = PerthroBlock::from_rows(&[vec![0.5], vec![0.25]], vec![0.1, 0.2]).unwrap();
        let c = Circuit::new(vec![b], Head::Identity).unwrap();
        let d = Dataset {
            features: vec![vec![1e300]],
            targets: vec![vec![1.0, 0.0]],
            labels: None,
            class_names: vec![],
            feature_names: vec![],
            feature_scaling: None,
            target_scaling: None,
        };
        let cfg = TrainConfig {
            learning_rate: 1e12,
            epochs: 3,
            optimizer: Optimizer::Sgd,
            ..Default::default()
        };
        match train(&c, &d, LossKind::Mse, &cfg) {
            Err(Error::Training { epoch, .. }) => assert_eq!(epoch, 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn empty_dataset_rejected() {
        let c = xor_solution();
        let empty = xor_dataset().subset(&[]);
        assert!(matches!(
            train(&c, &empty, LossKind::Mse, &TrainConfig::default()),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn xor_solution_scores_perfectly() {
        let c = xor_solution();
        let d = xor_dataset();
        assert_eq!(evaluate(&c, &d, Metric::Accuracy).unwrap(), 1.0);
        let noisy = evaluate_with_shots(&c, &d, Metric::Accuracy, 1024, 1024, 5, Execution::Parallel).unwrap();
        assert!(noisy >= 0.95, "{noisy}");
    }

    #[test]
    fn identity_regression_has_zero_mse() {
        let b = PerthroBlock::from_rows(&[vec![0.0]], vec![0.3]).unwrap();
        let c = Circuit::new(vec![b], Head::Identity).unwrap();
        let z = 0.3f64.sin().powi(2);
        let d = Dataset {
            features: vec![vec![0.0], vec![1.0]],
            targets: vec![vec![z], vec![z]],
            labels: None,
            class_names: vec![],
            feature_names: vec![],
            feature_scaling: None,
            target_scaling: None,
        };
        assert_eq!(evaluate(&c, &d, Metric::Mse).unwrap(), 0.0);
    }

    #[test]
    fn shot_trials_independent_of_execution() {
        let c = xor_solution();
        let d = xor_dataset();
        let a = shot_trials(&c, &d, 64, 100, 9, Execution::Sequential).unwrap();
        let b = shot_trials(&c, &d, 64, 100, 9, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn batch_gradient_same_in_both_modes() {
        let mut rng = seeded(4);
        let c = Circuit::random(2, &[3, 2], Head::xor(), 1.0, &mut rng).unwrap();
        let d = xor_dataset();
        let idx = [0, 1, 2, 3];
        let a = batch_gradient(&c, &d, &idx, LossKind::Mse, Execution::Sequential).unwrap();
        let b = batch_gradient(&c, &d, &idx, LossKind::Mse, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn report_csv_columns() {
        let r = TrainReport {
            initial_loss: 1.0,
            loss: vec![0.5, 0.25],
            accuracy: Some(vec![0.5, 1.0]),
            validation_loss: None,
            validation_accuracy: None,
            final_test_metric: None,
            wall_clock_seconds: 0.0,
        };
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "epoch,loss,accuracy\n1,0.5,0.5\n2,0.25,1\n");
    }
}
