//! Local explanations by token masking and a weighted linear surrogate.
//!
//! The document's token positions are the interpretable features. Random
//! subsets of positions are removed, the black-box spam score of each masked
//! document is recorded, and a ridge regression from keep/drop indicators to
//! scores is fitted with samples weighted by their proximity to the original.
//! Positive coefficients push toward spam.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::ClassifierError;
use crate::pipeline::Pipeline;
use crate::textprep::{preprocess_with_spans, TokenSequence};

#[derive(Debug, Error, PartialEq)]
pub enum ExplainError {
    #[error("document has no tokens to explain")]
    EmptyDocument,
    #[error("model and vectorizer disagree: {0}")]
    ModelVectorizerMismatch(ClassifierError),
    #[error("invalid explain config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExplainConfig {
    pub n_samples: usize,
    pub kernel_width: f64,
    pub top_k: usize,
    pub seed: u64,
    /// Ridge penalty of the surrogate.
    pub ridge: f64,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        Self {
            n_samples: 1000,
            kernel_width: 25.0,
            top_k: 10,
            seed: 42,
            ridge: 1.0,
        }
    }
}

impl ExplainConfig {
    fn validate(&self) -> Result<(), ExplainError> {
        let bad = |m: &str| Err(ExplainError::InvalidConfig(m.into()));
        if self.n_samples == 0 {
            return bad("n_samples must be at least 1");
        }
        if self.kernel_width.is_nan() || self.kernel_width <= 0.0 {
            return bad("kernel_width must be positive");
        }
        if self.top_k == 0 {
            return bad("top_k must be at least 1");
        }
        if self.ridge.is_nan() || self.ridge < 0.0 {
            return bad("ridge must be non-negative");
        }
        Ok(())
    }
}

/// Anything that assigns a spam score in `[0, 1]` to a token sequence.
pub trait SpamScorer {
    fn spam_score(&self, tokens: &TokenSequence) -> f64;
}

impl SpamScorer for Pipeline {
    fn spam_score(&self, tokens: &TokenSequence) -> f64 {
        self.predict_tokens(tokens).map(|p| p.score).unwrap_or(f64::NAN)
    }
}

impl<F: Fn(&TokenSequence) -> f64> SpamScorer for F {
    fn spam_score(&self, tokens: &TokenSequence) -> f64 {
        self(tokens)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenWeight {
    pub token: String,
    /// Index into the preprocessed token sequence.
    pub position: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassProbs {
    pub ham: f64,
    pub spam: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub class_probs: ClassProbs,
    /// Sorted by descending `|weight|`, ties by position.
    pub token_weights: Vec<TokenWeight>,
    /// Weighted R² of the surrogate on the perturbation sample.
    pub surrogate_fit: f64,
    pub intercept: f64,
}

impl Explanation {
    /// Weights toward ham: the spam weights negated.
    pub fn ham_weights(&self) -> Vec<TokenWeight> {
        self.token_weights
            .iter()
            .map(|t| TokenWeight {
                weight: -t.weight,
                ..t.clone()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedSample {
    /// `true` where the token at that position is kept.
    pub mask: Vec<bool>,
    pub doc: TokenSequence,
}

/// Sample 0 is the unmasked document. Every other sample removes a
/// non-empty random subset of positions: first a count uniform in
/// `1..=len`, then that many distinct positions.
pub fn perturb_samples(doc: &TokenSequence, n: usize, seed: u64) -> Result<Vec<PerturbedSample>, ExplainError> {
    if doc.is_empty() {
        return Err(ExplainError::EmptyDocument);
    }
    let len = doc.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    out.push(PerturbedSample {
        mask: vec![true; len],
        doc: doc.clone(),
    });
    for _ in 1..n {
        let n_remove = rng.gen_range(1..=len);
        let mut mask = vec![true; len];
        for p in index::sample(&mut rng, len, n_remove) {
            mask[p] = false;
        }
        let kept = doc.iter().zip(&mask).filter(|(_, &keep)| keep).map(|(t, _)| t.clone()).collect();
        out.push(PerturbedSample { mask, doc: kept });
    }
    Ok(out)
}

/// Cosine distance between a mask and the all-kept mask.
fn mask_distance(mask: &[bool]) -> f64 {
    let kept = mask.iter().filter(|&&m| m).count();
    if kept == 0 {
        return 1.0;
    }
    1.0 - (kept as f64 / mask.len() as f64).sqrt()
}

/// Proximity weight `exp(-(100 d)^2 / width^2)` for cosine distance `d`.
pub fn proximity(mask: &[bool], kernel_width: f64) -> f64 {
    let d = 100.0 * mask_distance(mask);
    (-(d * d) / (kernel_width * kernel_width)).exp()
}

struct Surrogate {
    coef: Vec<f64>,
    intercept: f64,
    r2: f64,
}

/// Weighted ridge regression with an unpenalized intercept.
fn fit_surrogate(masks: &[Vec<bool>], y: &[f64], w: &[f64], ridge: f64) -> Surrogate {
    use nalgebra::{DMatrix, DVector};

    let n = masks.len();
    let d = masks[0].len();
    let wsum: f64 = w.iter().sum();
    let y_mean = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / wsum;
    let mut x_mean = vec![0.0; d];
    for (m, &wi) in masks.iter().zip(w) {
        for (xm, &keep) in x_mean.iter_mut().zip(m) {
            if keep {
                *xm += wi;
            }
        }
    }
    x_mean.iter_mut().for_each(|v| *v /= wsum);

    // rows scaled by sqrt(w) so that A = Xs^T Xs
    let xs = DMatrix::from_fn(n, d, |i, j| {
        let x = if masks[i][j] { 1.0 } else { 0.0 };
        (x - x_mean[j]) * w[i].sqrt()
    });
    let ys = DVector::from_fn(n, |i, _| (y[i] - y_mean) * w[i].sqrt());
    let mut a = xs.tr_mul(&xs);
    for j in 0..d {
        a[(j, j)] += ridge;
    }
    let b = xs.tr_mul(&ys);
    let coef = match a.clone().cholesky() {
        Some(ch) => ch.solve(&b),
        // singular only when ridge == 0 and columns are collinear
        None => a.pseudo_inverse(1e-12).map(|p| p * &b).unwrap_or_else(|_| DVector::zeros(d)),
    };
    let coef: Vec<f64> = coef.iter().copied().collect();
    let intercept = y_mean - coef.iter().zip(&x_mean).map(|(c, m)| c * m).sum::<f64>();

    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for ((m, &yi), &wi) in masks.iter().zip(y).zip(w) {
        let pred = intercept + m.iter().zip(&coef).filter(|(&k, _)| k).map(|(_, c)| c).sum::<f64>();
        ss_res += wi * (yi - pred).powi(2);
        ss_tot += wi * (yi - y_mean).powi(2);
    }
    let r2 = if ss_tot <= 1e-12 * wsum.max(1.0) {
        if ss_res <= 1e-12 * wsum.max(1.0) {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Surrogate { coef, intercept, r2 }
}

/// Explains the spam score of an already-tokenized document.
pub fn explain_tokens<S: SpamScorer + ?Sized>(scorer: &S, doc: &TokenSequence, cfg: &ExplainConfig) -> Result<Explanation, ExplainError> {
    cfg.validate()?;
    let samples = perturb_samples(doc, cfg.n_samples, cfg.seed)?;
    let scores: Vec<f64> = samples.iter().map(|s| scorer.spam_score(&s.doc)).collect();
    let weights: Vec<f64> = samples.iter().map(|s| proximity(&s.mask, cfg.kernel_width)).collect();
    let masks: Vec<Vec<bool>> = samples.into_iter().map(|s| s.mask).collect();
    let fit = fit_surrogate(&masks, &scores, &weights, cfg.ridge);

    let mut token_weights: Vec<TokenWeight> = doc
        .iter()
        .zip(&fit.coef)
        .enumerate()
        .map(|(position, (token, &weight))| TokenWeight {
            token: token.clone(),
            position,
            weight,
        })
        .collect();
    token_weights.sort_by(|a, b| b.weight.abs().total_cmp(&a.weight.abs()).then(a.position.cmp(&b.position)));
    token_weights.truncate(cfg.top_k);

    let spam = scores[0];
    Ok(Explanation {
        class_probs: ClassProbs { ham: 1.0 - spam, spam },
        token_weights,
        surrogate_fit: fit.r2,
        intercept: fit.intercept,
    })
}

/// Explains the spam score `scorer` assigns to `raw`, tokenized with
/// `tokenize`.
pub fn explain_with<S, T>(scorer: &S, tokenize: T, raw: &str, cfg: &ExplainConfig) -> Result<Explanation, ExplainError>
where
    S: SpamScorer + ?Sized,
    T: Fn(&str) -> TokenSequence,
{
    explain_tokens(scorer, &tokenize(raw), cfg)
}

/// Explains a pipeline's prediction for `raw`.
pub fn explain(pipeline: &Pipeline, raw: &str, cfg: &ExplainConfig) -> Result<Explanation, ExplainError> {
    pipeline.validate().map_err(ExplainError::ModelVectorizerMismatch)?;
    explain_with(pipeline, |t| pipeline.tokenize(t), raw, cfg)
}

/// Byte range in `raw` of every preprocessed token position, for
/// highlighting explanations in the original text.
pub fn token_spans(pipeline: &Pipeline, raw: &str) -> Vec<std::ops::Range<usize>> {
    preprocess_with_spans(raw, pipeline.prep()).into_iter().map(|(_, r)| r).collect()
}
