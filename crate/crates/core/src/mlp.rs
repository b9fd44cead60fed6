//! Feedforward binary classifier: one ReLU hidden layer, a sigmoid output unit,
//! binary cross-entropy loss and the Adam optimizer.
//!
//! All parameters live in one flat vector laid out as
//! `[W1 | b1 | W2 | b2]`. `W1` is stored input-major (`w1[i * hidden + j]`
//! connects input `i` to hidden unit `j`) so that sparse inputs only touch the
//! columns of their nonzero entries.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};

use crate::{seeded, sigmoid, Error, Result};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;
const PROB_CLAMP: f64 = 1e-12;
const MODEL_MAGIC: &str = "eventpred-mlp 1";

/// Hidden width from the mean of input and output layer sizes.
pub fn hidden_size(n_in: usize) -> usize {
    n_in.div_ceil(2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    n_in: usize,
    hidden: usize,
    params: Vec<f64>,
}

impl MlpModel {
    /// He-initialized weights, zero biases, `hidden = floor((n_in + 1) / 2)`.
    pub fn init(n_in: usize, seed: u64) -> Result<Self> {
        Self::init_capped(n_in, None, seed)
    }

    /// Like [`MlpModel::init`] but with the hidden width limited to `cap`.
    pub fn init_capped(n_in: usize, cap: Option<usize>, seed: u64) -> Result<Self> {
        if n_in == 0 {
            return Err(Error::Config("n_in must be >= 1".into()));
        }
        let hidden = cap.map_or(hidden_size(n_in), |c| hidden_size(n_in).min(c.max(1)));
        let mut model = Self::zeros(n_in, hidden);
        let mut rng = seeded(seed);
        let w1 = Normal::new(0.0, (2.0 / n_in as f64).sqrt()).expect("positive std");
        let w2 = Normal::new(0.0, (2.0 / hidden as f64).sqrt()).expect("positive std");
        let (w1_len, w2_start) = (n_in * hidden, n_in * hidden + hidden);
        for p in &mut model.params[..w1_len] {
            *p = w1.sample(&mut rng);
        }
        for p in &mut model.params[w2_start..w2_start + hidden] {
            *p = w2.sample(&mut rng);
        }
        Ok(model)
    }

    /// All-zero parameters.
    pub fn zeros(n_in: usize, hidden: usize) -> Self {
        MlpModel {
            n_in,
            hidden,
            params: vec![0.0; n_in * hidden + 2 * hidden + 1],
        }
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn w1_len(&self) -> usize {
        self.n_in * self.hidden
    }

    /// Weight from input `i` to hidden unit `j`.
    pub fn w1(&self, j: usize, i: usize) -> f64 {
        self.params[i * self.hidden + j]
    }

    pub fn set_w1(&mut self, j: usize, i: usize, value: f64) {
        let h = self.hidden;
        self.params[i * h + j] = value;
    }

    pub fn b1_mut(&mut self) -> &mut [f64] {
        let s = self.w1_len();
        &mut self.params[s..s + self.hidden]
    }

    pub fn w2_mut(&mut self) -> &mut [f64] {
        let s = self.w1_len() + self.hidden;
        &mut self.params[s..s + self.hidden]
    }

    pub fn set_b2(&mut self, value: f64) {
        *self.params.last_mut().expect("non-empty") = value;
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_in {
            return Err(Error::DimensionMismatch {
                expected: self.n_in,
                got: x.len(),
            });
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(())
    }

    /// Pre-activations of the hidden layer, touching only nonzero inputs.
    fn hidden_pre(&self, x: &[f64], nonzero: &[usize], out: &mut [f64]) {
        let h = self.hidden;
        let s = self.w1_len();
        out.copy_from_slice(&self.params[s..s + h]);
        for &i in nonzero {
            let xi = x[i];
            let col = &self.params[i * h..(i + 1) * h];
            for (o, w) in out.iter_mut().zip(col) {
                *o += w * xi;
            }
        }
    }

    fn output_logit(&self, act: &[f64]) -> f64 {
        let h = self.hidden;
        let s = self.w1_len() + h;
        let w2 = &self.params[s..s + h];
        act.iter().zip(w2).map(|(a, w)| a * w).sum::<f64>() + self.params[s + h]
    }

    fn forward_nz(&self, x: &[f64], nonzero: &[usize], pre: &mut [f64]) -> f64 {
        self.hidden_pre(x, nonzero, pre);
        for v in pre.iter_mut() {
            *v = v.max(0.0);
        }
        sigmoid(self.output_logit(pre))
    }

    /// `sigmoid(W2 . relu(W1 x + b1) + b2)`, clamped away from 0 and 1.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        let nz = nonzero(x);
        let mut pre = vec![0.0; self.hidden];
        Ok(self
            .forward_nz(x, &nz, &mut pre)
            .clamp(PROB_CLAMP, 1.0 - PROB_CLAMP))
    }

    /// 1 iff `forward(x) >= threshold`.
    pub fn predict(&self, x: &[f64], threshold: f64) -> Result<u8> {
        Ok(u8::from(self.forward(x)? >= threshold))
    }

    /// Binary cross-entropy and its gradient for one example.
    pub fn bce_grad(&self, x: &[f64], y: u8) -> Result<(f64, Vec<f64>)> {
        self.check_input(x)?;
        let nz = nonzero(x);
        let mut grad = vec![0.0; self.params.len()];
        let mut pre = vec![0.0; self.hidden];
        let loss = self.accumulate_grad(x, &nz, y, 1.0, &mut pre, &mut grad);
        Ok((loss, grad))
    }

    /// Add `weight * dL/dtheta` into `grad`; returns the loss.
    fn accumulate_grad(
        &self,
        x: &[f64],
        nonzero: &[usize],
        y: u8,
        weight: f64,
        pre: &mut [f64],
        grad: &mut [f64],
    ) -> f64 {
        let h = self.hidden;
        self.hidden_pre(x, nonzero, pre);
        let act: Vec<f64> = pre.iter().map(|v| v.max(0.0)).collect();
        let p = sigmoid(self.output_logit(&act));
        let target = f64::from(y);
        let pc = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
        let loss = -(target * pc.ln() + (1.0 - target) * (1.0 - pc).ln());

        let d_out = (p - target) * weight;
        let s_b1 = self.w1_len();
        let s_w2 = s_b1 + h;
        grad[s_w2 + h] += d_out;
        for j in 0..h {
            grad[s_w2 + j] += d_out * act[j];
        }
        // delta for hidden pre-activations, stored in `pre`
        for j in 0..h {
            pre[j] = if pre[j] > 0.0 {
                d_out * self.params[s_w2 + j]
            } else {
                0.0
            };
            grad[s_b1 + j] += pre[j];
        }
        for &i in nonzero {
            let xi = x[i];
            for (g, d) in grad[i * h..(i + 1) * h].iter_mut().zip(pre.iter()) {
                *g += d * xi;
            }
        }
        loss
    }

    /// Text dump: magic line, dimensions, config fingerprint, one value per line.
    pub fn save<W: Write>(&self, fingerprint: &str, mut out: W) -> Result<()> {
        writeln!(out, "{MODEL_MAGIC}")?;
        writeln!(out, "n_in {}", self.n_in)?;
        writeln!(out, "hidden {}", self.hidden)?;
        writeln!(out, "config {fingerprint}")?;
        for p in &self.params {
            writeln!(out, "{p}")?;
        }
        Ok(())
    }

    /// Load a dump written by [`MlpModel::save`]; returns the model and its fingerprint.
    pub fn load<R: BufRead>(reader: R) -> Result<(Self, String)> {
        let mut lines = reader.lines();
        let mut next = |what: &str| -> Result<String> {
            lines
                .next()
                .transpose()?
                .ok_or_else(|| Error::ModelFormat(format!("missing {what}")))
        };
        if next("header")? != MODEL_MAGIC {
            return Err(Error::ModelFormat("unknown header".into()));
        }
        let field = |line: String, key: &str| -> Result<String> {
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| Error::ModelFormat(format!("expected `{key}` line")))
        };
        let parse_dim = |s: String| {
            s.parse::<usize>()
                .map_err(|e| Error::ModelFormat(e.to_string()))
        };
        let n_in = parse_dim(field(next("n_in")?, "n_in")?)?;
        let hidden = parse_dim(field(next("hidden")?, "hidden")?)?;
        let fingerprint = field(next("config")?, "config")?;
        if n_in == 0 || hidden == 0 {
            return Err(Error::ModelFormat("zero dimension".into()));
        }
        let mut model = Self::zeros(n_in, hidden);
        for p in model.params.iter_mut() {
            *p = next("parameter")?
                .trim()
                .parse()
                .map_err(|e| Error::ModelFormat(format!("parameter: {e}")))?;
        }
        Ok((model, fingerprint))
    }
}

fn nonzero(x: &[f64]) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        AdamState {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState, lr: f64) -> Result<()> {
    let n = params.len();
    for len in [grads.len(), state.m.len(), state.v.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: len,
            });
        }
    }
    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - ADAM_BETA1.powi(t);
    let c2 = 1.0 - ADAM_BETA2.powi(t);
    for (((p, &g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
        *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Early stopping on a held-out slice of the training data; `None` trains all epochs.
    pub patience: Option<usize>,
    pub holdout_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 32,
            learning_rate: 0.001,
            seed: 0,
            patience: Some(10),
            holdout_fraction: 0.1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch_size must be >= 1".into()));
        }
        if self.learning_rate.is_nan() || self.learning_rate < 0.0 {
            return Err(Error::Config("learning_rate must be >= 0".into()));
        }
        if !(0.0..1.0).contains(&self.holdout_fraction) {
            return Err(Error::Config("holdout_fraction must lie in [0, 1)".into()));
        }
        Ok(())
    }

    pub fn fingerprint(&self) -> String {
        format!(
            "epochs={};batch={};lr={};seed={};patience={};holdout={}",
            self.epochs,
            self.batch_size,
            self.learning_rate,
            self.seed,
            self.patience.map_or("none".to_string(), |p| p.to_string()),
            self.holdout_fraction
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: MlpModel,
    /// Mean training loss of each epoch actually run.
    pub epoch_losses: Vec<f64>,
    /// Epoch whose parameters were returned (0-based).
    pub best_epoch: usize,
}

/// Mini-batch Adam training. With `patience` set, a seeded holdout slice picks
/// the returned parameters and stops training early.
pub fn train(model: MlpModel, xs: &[Vec<f64>], ys: &[u8], config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::InsufficientData(format!(
            "{} samples with {} labels",
            xs.len(),
            ys.len()
        )));
    }
    for x in xs {
        model.check_input(x)?;
    }
    let nz: Vec<Vec<usize>> = xs.iter().map(|x| nonzero(x)).collect();
    let mut rng = seeded(config.seed);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let holdout: Vec<usize> = match config.patience {
        Some(_) => {
            let k = (xs.len() as f64 * config.holdout_fraction).round() as usize;
            if k >= 1 && k < xs.len() {
                order.shuffle(&mut rng);
                let h = order.split_off(xs.len() - k);
                order.sort_unstable();
                h
            } else {
                Vec::new()
            }
        }
        None => Vec::new(),
    };

    let mut model = model;
    let mut adam = AdamState::new(model.params.len());
    let mut grad = vec![0.0; model.params.len()];
    let mut pre = vec![0.0; model.hidden];
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, Vec<f64>)> = None;

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            grad.fill(0.0);
            let w = 1.0 / batch.len() as f64;
            for &i in batch {
                total += model.accumulate_grad(&xs[i], &nz[i], ys[i], w, &mut pre, &mut grad);
            }
            adam_step(&mut model.params, &grad, &mut adam, config.learning_rate)?;
        }
        epoch_losses.push(total / order.len() as f64);

        if let (Some(patience), false) = (config.patience, holdout.is_empty()) {
            let loss = holdout
                .iter()
                .map(|&i| {
                    let p = model.forward_nz(&xs[i], &nz[i], &mut pre);
                    let pc = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
                    if ys[i] == 1 {
                        -pc.ln()
                    } else {
                        -(1.0 - pc).ln()
                    }
                })
                .sum::<f64>()
                / holdout.len() as f64;
            match &best {
                Some((b, _, _)) if loss >= *b => {}
                _ => best = Some((loss, epoch, model.params.clone())),
            }
            let best_epoch = best.as_ref().map_or(epoch, |b| b.1);
            if epoch - best_epoch >= patience {
                break;
            }
        }
    }

    let last = epoch_losses.len() - 1;
    let best_epoch = match best {
        Some((_, e, params)) => {
            model.params = params;
            e
        }
        None => last,
    };
    Ok(TrainOutcome {
        model,
        epoch_losses,
        best_epoch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hidden_rule() {
        assert_eq!(MlpModel::init(228, 0).unwrap().hidden(), 114);
        assert_eq!(MlpModel::init(1, 0).unwrap().hidden(), 1);
        assert_eq!(MlpModel::init_capped(228, Some(50), 0).unwrap().hidden(), 50);
        assert!(MlpModel::init(0, 0).is_err());
    }

    #[test]
    fn init_is_deterministic_with_zero_biases() {
        let a = MlpModel::init(10, 3).unwrap();
        assert_eq!(a, MlpModel::init(10, 3).unwrap());
        assert_ne!(a, MlpModel::init(10, 4).unwrap());
        let h = a.hidden();
        let b1 = &a.params()[10 * h..11 * h];
        assert!(b1.iter().all(|&b| b == 0.0));
        assert_eq!(*a.params().last().unwrap(), 0.0);
    }

    #[test]
    fn zero_model_outputs_half() {
        let m = MlpModel::zeros(3, 2);
        assert_eq!(m.forward(&[1.0, -4.0, 9.0]).unwrap(), 0.5);
        assert_eq!(m.predict(&[1.0, -4.0, 9.0], 0.5).unwrap(), 1);
    }

    #[test]
    fn hand_evaluated_forward() {
        let mut m = MlpModel::zeros(2, 1);
        m.set_w1(0, 0, 1.0);
        m.w2_mut()[0] = 1.0;
        let p = m.forward(&[1.0, -1.0]).unwrap();
        assert!((p - 0.7310585786300049).abs() < 1e-15);
    }

    #[test]
    fn forward_rejects_bad_input() {
        let m = MlpModel::zeros(2, 1);
        assert!(matches!(m.forward(&[1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(m.forward(&[1.0, f64::NAN]), Err(Error::NonFinite(1))));
    }

    #[test]
    fn predict_thresholds() {
        let mut m = MlpModel::zeros(1, 1);
        // logit ln(0.49/0.51) gives p = 0.49
        m.set_b2((0.49f64 / 0.51).ln());
        assert_eq!(m.predict(&[0.0], 0.5).unwrap(), 0);
        assert_eq!(m.predict(&[0.0], 0.0).unwrap(), 1);
    }

    #[test]
    fn bce_at_half_and_limit() {
        let m = MlpModel::zeros(2, 1);
        let (loss, _) = m.bce_grad(&[0.3, 0.1], 1).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
        let mut sure = MlpModel::zeros(1, 1);
        sure.set_b2(60.0);
        let (loss, _) = sure.bce_grad(&[0.0], 1).unwrap();
        assert!((0.0..1e-12).contains(&loss));
        let (loss, _) = sure.bce_grad(&[0.0], 0).unwrap();
        assert!((loss - 1e12f64.ln()).abs() < 1e-3);
    }

    #[test]
    fn adam_first_step_is_sign() {
        let mut p = vec![1.0, -2.0, 0.5];
        let g = vec![0.3, -7.0, 1e-3];
        let mut s = AdamState::new(3);
        adam_step(&mut p, &g, &mut s, 0.01).unwrap();
        let expect = [1.0 - 0.01, -2.0 + 0.01, 0.5 - 0.01];
        for (a, b) in p.iter().zip(expect) {
            assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        }
    }

    #[test]
    fn adam_zero_grad_and_zero_lr() {
        let mut p = vec![1.0, 2.0];
        let mut s = AdamState::new(2);
        adam_step(&mut p, &[0.0, 0.0], &mut s, 0.1).unwrap();
        assert_eq!(p, vec![1.0, 2.0]);
        adam_step(&mut p, &[3.0, -1.0], &mut s, 0.0).unwrap();
        assert_eq!(p, vec![1.0, 2.0]);
        assert!(adam_step(&mut p, &[1.0], &mut s, 0.1).is_err());
    }

    #[test]
    fn adam_two_step_trace() {
        // Independent trace for theta = 0, g = 1 twice, lr = 0.1.
        let (b1, b2, eps, lr) = (0.9f64, 0.999f64, 1e-8f64, 0.1f64);
        let m1 = 1.0 - b1;
        let v1 = 1.0 - b2;
        let step1 = lr * (m1 / (1.0 - b1)) / ((v1 / (1.0 - b2)).sqrt() + eps);
        let m2 = b1 * m1 + (1.0 - b1);
        let v2 = b2 * v1 + (1.0 - b2);
        let step2 = lr * (m2 / (1.0 - b1 * b1)) / ((v2 / (1.0 - b2 * b2)).sqrt() + eps);
        let expected = 0.0 - step1 - step2;

        let mut theta = vec![0.0];
        let mut s = AdamState::new(1);
        adam_step(&mut theta, &[1.0], &mut s, lr).unwrap();
        adam_step(&mut theta, &[1.0], &mut s, lr).unwrap();
        assert!((theta[0] - expected).abs() < 1e-12);
        assert!((theta[0] + 0.2).abs() < 1e-6);
    }

    #[test]
    fn sparse_forward_matches_dense() {
        let m = MlpModel::init(6, 8).unwrap();
        let x = [0.0, 1.5, 0.0, 0.0, -2.0, 0.0];
        let h = m.hidden();
        let mut dense = 0.0;
        for j in 0..h {
            let mut z = m.params()[6 * h + j];
            for (i, xi) in x.iter().enumerate() {
                z += m.w1(j, i) * xi;
            }
            dense += z.max(0.0) * m.params()[7 * h + j];
        }
        let p = sigmoid(dense + m.params()[8 * h]);
        assert_eq!(m.forward(&x).unwrap(), p);
    }

    #[test]
    fn model_file_roundtrip() {
        let m = MlpModel::init(5, 2).unwrap();
        let mut buf = Vec::new();
        m.save("epochs=1", &mut buf).unwrap();
        let (back, fp) = MlpModel::load(buf.as_slice()).unwrap();
        assert_eq!(fp, "epochs=1");
        assert_eq!(back, m);
        let x = [0.1, 0.2, -0.3, 4.0, 0.0];
        assert_eq!(back.forward(&x).unwrap().to_bits(), m.forward(&x).unwrap().to_bits());
        assert!(MlpModel::load("nope\n".as_bytes()).is_err());
        let truncated = &buf[..buf.len() / 2];
        assert!(MlpModel::load(truncated).is_err());
    }

    #[test]
    fn training_rejects_bad_shapes() {
        let m = MlpModel::init(2, 0).unwrap();
        let cfg = TrainConfig::default();
        assert!(train(m.clone(), &[], &[], &cfg).is_err());
        assert!(train(m.clone(), &[vec![1.0, 0.0]], &[1, 0], &cfg).is_err());
        let bad = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        assert!(train(m, &[vec![1.0, 0.0]], &[1], &bad).is_err());
    }
}
