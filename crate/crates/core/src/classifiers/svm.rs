//! Linear SVM trained by Pegasos-style stochastic subgradient descent.
//!
//! Minimizes `λ/2 ‖w‖² + (1/n) Σ max(0, 1 − y (w·x + b))` with
//! `λ = 1 / (C n)`. The bias is learned as the weight of a constant feature
//! and is regularized with the rest. The weight vector is stored as
//! `scale * v` so the per-step shrink costs O(1) and each step touches only
//! the nonzeros of one example.
//!
//! After every epoch two candidates are scored on the full objective: the
//! current iterate and the running average of end-of-epoch iterates. The
//! returned model is the best candidate seen in any epoch, and
//! `objective_history` records its objective after each epoch, so the
//! history never increases.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{both_classes, check_training_data, sigmoid, ClassifierError, Prediction};
use crate::corpus::Label;
use crate::vectorize::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    /// Regularization trade-off; larger means weaker regularization.
    pub c: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            epochs: 20,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    weights: Vec<f64>,
    bias: f64,
    params: SvmParams,
    objective_history: Vec<f64>,
}

impl SvmModel {
    /// A model with the given weights and bias, e.g. for tests.
    pub fn from_parts(weights: Vec<f64>, bias: f64) -> Self {
        Self {
            weights,
            bias,
            params: SvmParams::default(),
            objective_history: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn params(&self) -> &SvmParams {
        &self.params
    }

    /// Objective after each epoch.
    pub fn objective_history(&self) -> &[f64] {
        &self.objective_history
    }

    pub fn margin(&self, x: &SparseVector) -> f64 {
        x.dot_dense(&self.weights) + self.bias
    }

    /// `score = sigmoid(margin)`. This is a monotone squashing of the margin,
    /// not a calibrated probability.
    pub fn predict(&self, x: &SparseVector) -> Prediction {
        let m = self.margin(x);
        Prediction::from_score(sigmoid(m), m)
    }
}

/// Regularized hinge objective of `(weights, bias)` on a dataset.
pub fn objective(weights: &[f64], bias: f64, lambda: f64, x: &[SparseVector], y: &[Label]) -> f64 {
    let reg = 0.5 * lambda * (weights.iter().map(|w| w * w).sum::<f64>() + bias * bias);
    let hinge: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (1.0 - yi.sign() * (xi.dot_dense(weights) + bias)).max(0.0))
        .sum();
    reg + hinge / x.len() as f64
}

struct ScaledWeights {
    v: Vec<f64>,
    v_bias: f64,
    scale: f64,
    sq_norm: f64,
}

impl ScaledWeights {
    fn raw_dot(&self, x: &SparseVector) -> f64 {
        x.dot_dense(&self.v) + self.v_bias
    }

    fn fold_scale(&mut self) {
        let s = self.scale;
        self.v.iter_mut().for_each(|w| *w *= s);
        self.v_bias *= s;
        self.sq_norm *= s * s;
        self.scale = 1.0;
    }

    fn weights(&self) -> (Vec<f64>, f64) {
        (self.v.iter().map(|w| w * self.scale).collect(), self.v_bias * self.scale)
    }
}

pub fn train_svm(x: &[SparseVector], y: &[Label], params: &SvmParams) -> Result<SvmModel, ClassifierError> {
    if params.c.is_nan() || params.c <= 0.0 || params.c.is_infinite() {
        return Err(ClassifierError::InvalidHyperparameter(format!(
            "C must be positive, got {}",
            params.c
        )));
    }
    if params.epochs == 0 {
        return Err(ClassifierError::InvalidHyperparameter("epochs must be at least 1".into()));
    }
    let dim = check_training_data(x, y, 2)?;
    both_classes(y)?;

    let n = x.len();
    let lambda = 1.0 / (params.c * n as f64);
    let radius_sq = 1.0 / lambda;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut w = ScaledWeights {
        v: vec![0.0; dim],
        v_bias: 0.0,
        scale: 1.0,
        sq_norm: 0.0,
    };
    let mut avg_sum = vec![0.0; dim];
    let mut avg_bias_sum = 0.0;
    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    let mut history = Vec::with_capacity(params.epochs);
    let mut t = 0u64;

    for epoch in 1..=params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let xi = &x[i];
            let yi = y[i].sign();
            let raw = w.raw_dot(xi);
            let margin = w.scale * raw;

            // shrink: w <- (1 - eta * lambda) w
            let shrink = 1.0 - 1.0 / t as f64;
            if shrink <= 0.0 {
                w.v.iter_mut().for_each(|v| *v = 0.0);
                w.v_bias = 0.0;
                w.scale = 1.0;
                w.sq_norm = 0.0;
            } else {
                w.scale *= shrink;
            }

            if yi * margin < 1.0 {
                // w <- w + eta * y * x (x augmented with a constant 1)
                let a = eta * yi / w.scale;
                let raw_now = if shrink <= 0.0 { 0.0 } else { raw };
                for (j, v) in xi.iter() {
                    w.v[j as usize] += a * v;
                }
                w.v_bias += a;
                w.sq_norm += 2.0 * a * raw_now + a * a * (xi.squared_norm() + 1.0);
            }

            // project onto the ball of radius 1/sqrt(lambda)
            let norm_sq = w.scale * w.scale * w.sq_norm.max(0.0);
            if norm_sq > radius_sq {
                w.scale *= (radius_sq / norm_sq).sqrt();
            }
            if w.scale < 1e-9 {
                w.fold_scale();
            }
        }
        // recompute the tracked norm exactly to stop drift
        w.sq_norm = w.v.iter().map(|v| v * v).sum::<f64>() + w.v_bias * w.v_bias;

        let (wk, bk) = w.weights();
        avg_sum.iter_mut().zip(&wk).for_each(|(s, v)| *s += v);
        avg_bias_sum += bk;
        let k = epoch as f64;
        let avg: Vec<f64> = avg_sum.iter().map(|s| s / k).collect();
        let avg_bias = avg_bias_sum / k;
        for (cw, cb) in [(avg, avg_bias), (wk, bk)] {
            let obj = objective(&cw, cb, lambda, x, y);
            if best.as_ref().is_none_or(|(b, _, _)| obj < *b) {
                best = Some((obj, cw, cb));
            }
        }
        history.push(best.as_ref().map(|b| b.0).expect("set above"));
    }

    let (_, weights, bias) = best.expect("at least one epoch");
    Ok(SvmModel {
        weights,
        bias,
        params: *params,
        objective_history: history,
    })
}
