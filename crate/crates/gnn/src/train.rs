//! Losses, gradients, Adam training and finite-difference checking.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{SatGnnConfig, Task};
use crate::net::{backward, check_shapes, forward_trace, sigmoid, PROB_CLAMP};
use crate::params::{ModelParams, SatGnn};
use crate::prepared::PreparedGraph;
use crate::GnnError;

/// Training target of one graph.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    /// Feasibility label of the graph's candidate, 0 or 1.
    Feasible(f64),
    /// Best known solution `z*` (one value per binary node).
    Best(Vec<u8>),
    /// Several solutions with weights summing to one.
    Pool {
        solutions: Vec<Vec<u8>>,
        weights: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub graph: PreparedGraph,
    pub target: Target,
}

/// Softmax of the QoS values, shifted by the maximum.
pub fn solution_weights(qos: &[f64]) -> Result<Vec<f64>, GnnError> {
    if qos.is_empty() {
        return Err(GnnError::EmptyPool);
    }
    let max = qos.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = qos.iter().map(|q| (q - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// Binary cross-entropy of `sigmoid(x)` against `y` with the probability
/// clamped to `[1e-12, 1 - 1e-12]`, and its derivative with respect to the
/// logit (zero where the clamp is active). Evaluated from the logit so that
/// probabilities near 0 or 1 keep full precision.
fn bce(x: f64, y: f64) -> (f64, f64) {
    let limit = ((1.0 - PROB_CLAMP) / PROB_CLAMP).ln();
    if x.abs() < limit {
        let loss = y * softplus(-x) + (1.0 - y) * softplus(x);
        return (loss, sigmoid(x) - y);
    }
    let (ln_p, ln_q) = if x > 0.0 {
        ((-PROB_CLAMP).ln_1p(), PROB_CLAMP.ln())
    } else {
        (PROB_CLAMP.ln(), (-PROB_CLAMP).ln_1p())
    };
    (-(y * ln_p + (1.0 - y) * ln_q), 0.0)
}

fn check_target(config: &SatGnnConfig, sample: &Sample) -> Result<(), GnnError> {
    let n_bin = sample.graph.binary.len();
    let ok = match (&sample.target, config.task) {
        (Target::Feasible(y), Task::Feasibility) => *y == 0.0 || *y == 1.0,
        (Target::Best(z), Task::Bias) => z.len() == n_bin,
        (Target::Pool { solutions, weights }, Task::Bias) => {
            !solutions.is_empty()
                && solutions.len() == weights.len()
                && solutions.iter().all(|z| z.len() == n_bin)
        }
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(GnnError::TargetMismatch(format!(
            "{:?} task cannot use this target for a graph with {n_bin} binary nodes",
            config.task
        )))
    }
}

/// Loss of one sample and its gradient with respect to every head logit.
fn loss_and_dlogits(sample: &Sample, logits: &[f64]) -> (f64, Vec<f64>) {
    let g = &sample.graph;
    let mut dlogits = vec![0.0; logits.len()];
    let per_node = |z: &[u8], weight: f64, dl: &mut [f64]| -> f64 {
        let n = g.binary.len().max(1) as f64;
        let mut total = 0.0;
        for (&v, &y) in g.binary.iter().zip(z) {
            let (l, d) = bce(logits[v], f64::from(y));
            total += l;
            dl[v] += weight * d / n;
        }
        weight * total / n
    };
    let loss = match &sample.target {
        Target::Feasible(y) => {
            let n = logits.len() as f64;
            let mean = logits.iter().sum::<f64>() / n;
            let (l, d) = bce(mean, *y);
            dlogits.iter_mut().for_each(|v| *v = d / n);
            l
        }
        Target::Best(z) => per_node(z, 1.0, &mut dlogits),
        Target::Pool { solutions, weights } => solutions
            .iter()
            .zip(weights)
            .map(|(z, &w)| per_node(z, w, &mut dlogits))
            .sum(),
    };
    (loss, dlogits)
}

/// Mean loss over `samples`.
pub fn loss(
    params: &ModelParams,
    config: &SatGnnConfig,
    samples: &[Sample],
) -> Result<f64, GnnError> {
    if samples.is_empty() {
        return Err(GnnError::EmptyDataset);
    }
    let mut total = 0.0;
    for s in samples {
        check_shapes(config, params, &s.graph)?;
        check_target(config, s)?;
        let trace = forward_trace(config, params, &s.graph);
        total += loss_and_dlogits(s, &trace.logits).0;
    }
    Ok(total / samples.len() as f64)
}

/// Mean loss over `samples` and its exact gradient.
pub fn loss_and_grad(
    params: &ModelParams,
    config: &SatGnnConfig,
    samples: &[Sample],
) -> Result<(f64, Vec<f64>), GnnError> {
    batch_loss_and_grad(params, config, samples.iter())
}

fn batch_loss_and_grad<'a>(
    params: &ModelParams,
    config: &SatGnnConfig,
    samples: impl ExactSizeIterator<Item = &'a Sample>,
) -> Result<(f64, Vec<f64>), GnnError> {
    let n = samples.len();
    if n == 0 {
        return Err(GnnError::EmptyDataset);
    }
    let mut grad = vec![0.0; params.len()];
    let mut total = 0.0;
    for s in samples {
        check_shapes(config, params, &s.graph)?;
        check_target(config, s)?;
        let trace = forward_trace(config, params, &s.graph);
        let (l, dlogits) = loss_and_dlogits(s, &trace.logits);
        total += l;
        backward(config, params, &s.graph, &trace, &dlogits, &mut grad);
    }
    let n = n as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    Ok((total / n, grad))
}

/// Largest relative error `|a - n| / max(|a|, |n|, 1e-8)` between the
/// analytic gradient and central differences (step `1e-5`) over
/// `n_checks` parameters drawn with `seed` (all of them if fewer exist).
pub fn grad_check(
    params: &ModelParams,
    config: &SatGnnConfig,
    sample: &Sample,
    n_checks: usize,
    seed: u64,
) -> Result<f64, GnnError> {
    const STEP: f64 = 1e-5;
    let batch = std::slice::from_ref(sample);
    let (_, analytic) = loss_and_grad(params, config, batch)?;
    let mut indices: Vec<usize> = (0..params.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    indices.truncate(n_checks);
    let mut probe = params.clone();
    let mut worst: f64 = 0.0;
    for k in indices {
        let orig = probe.values[k];
        probe.values[k] = orig + STEP;
        let up = loss(&probe, config, batch)?;
        probe.values[k] = orig - STEP;
        let down = loss(&probe, config, batch)?;
        probe.values[k] = orig;
        let numeric = (up - down) / (2.0 * STEP);
        let a = analytic[k];
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    Ok(worst)
}

/// Adam with the usual moment constants.
struct Adam {
    lr: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize, lr: f64) -> Self {
        Self {
            lr,
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }

    fn update(&mut self, params: &mut [f64], grad: &[f64]) {
        self.step += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.step);
        let c2 = 1.0 - Self::BETA2.powi(self.step);
        for i in 0..params.len() {
            self.m[i] = Self::BETA1 * self.m[i] + (1.0 - Self::BETA1) * grad[i];
            self.v[i] = Self::BETA2 * self.v[i] + (1.0 - Self::BETA2) * grad[i] * grad[i];
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] -= self.lr * mh / (vh.sqrt() + Self::EPS);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    /// 0 is the untrained model.
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
}

impl History {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_loss\n");
        for e in &self.epochs {
            let _ = writeln!(out, "{},{},{}", e.epoch, e.train_loss, e.val_loss);
        }
        out
    }
}

/// Trains a fresh model. Each epoch shuffles the training set with the
/// configured seed and takes one Adam step per mini-batch. The returned
/// model holds the parameters with the lowest validation loss (training
/// loss when `val` is empty), including the untrained epoch 0.
pub fn train(
    config: &SatGnnConfig,
    train_set: &[Sample],
    val: &[Sample],
) -> Result<(SatGnn, History), GnnError> {
    let model = SatGnn::new(config.clone())?;
    train_from(model, train_set, val)
}

/// Continues training `model` with its own configuration.
pub fn train_from(
    model: SatGnn,
    train_set: &[Sample],
    val: &[Sample],
) -> Result<(SatGnn, History), GnnError> {
    let config = model.config.clone();
    config.validate().map_err(GnnError::Config)?;
    if train_set.is_empty() {
        return Err(GnnError::EmptyDataset);
    }
    let mut params = model.params;
    let mut adam = Adam::new(params.len(), config.learning_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x005e_ed0f_7a1e);
    let evaluate = |params: &ModelParams, epoch: usize| -> Result<EpochRecord, GnnError> {
        let train_loss = loss(params, &config, train_set)?;
        let val_loss = if val.is_empty() {
            train_loss
        } else {
            loss(params, &config, val)?
        };
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(GnnError::Diverged { epoch });
        }
        Ok(EpochRecord {
            epoch,
            train_loss,
            val_loss,
        })
    };

    let mut history = History::default();
    let first = evaluate(&params, 0)?;
    history.epochs.push(first);
    let mut best = (first.val_loss, params.values.clone());
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            let batch = chunk.iter().map(|&i| &train_set[i]);
            let (l, grad) = batch_loss_and_grad(&params, &config, batch)?;
            if !l.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(GnnError::Diverged { epoch });
            }
            adam.update(&mut params.values, &grad);
        }
        let rec = evaluate(&params, epoch)?;
        history.epochs.push(rec);
        if rec.val_loss < best.0 {
            best = (rec.val_loss, params.values.clone());
        }
        if config.task == Task::Feasibility && rec.train_loss < 1e-2 {
            break;
        }
    }
    params.values = best.1;
    Ok((SatGnn { config, params }, history))
}

/// Fraction of feasibility samples classified correctly at threshold 0.5.
pub fn accuracy(model: &SatGnn, samples: &[Sample]) -> Result<f64, GnnError> {
    if samples.is_empty() {
        return Err(GnnError::EmptyDataset);
    }
    let mut correct = 0usize;
    for s in samples {
        let Target::Feasible(y) = s.target else {
            return Err(GnnError::TargetMismatch(
                "accuracy needs feasibility labels".into(),
            ));
        };
        let p = crate::net::forward(&model.params, &model.config, &s.graph)?[0];
        correct += usize::from((p >= 0.5) == (y == 1.0));
    }
    Ok(correct as f64 / samples.len() as f64)
}
