//! Skip-gram word embeddings trained with negative sampling.
//!
//! Each (center, context) pair is a logistic prediction: the context's output
//! vector should score high against the center's input vector, while `k`
//! words drawn from the unigram^0.75 distribution should score low. Training
//! is single-threaded so a fixed seed reproduces the table bit for bit.

use std::collections::HashMap;

use num_traits::Float;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::VectorizeError;
use crate::textprep::TokenSequence;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Word2VecParams {
    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    pub negative: usize,
    pub min_count: usize,
    pub seed: u64,
    pub learning_rate: f32,
}

impl Default for Word2VecParams {
    fn default() -> Self {
        Self {
            dim: 100,
            window: 5,
            epochs: 5,
            negative: 5,
            min_count: 2,
            seed: 42,
            learning_rate: 0.025,
        }
    }
}

impl Word2VecParams {
    fn validate(&self) -> Result<(), VectorizeError> {
        let bad = |what: &str| Err(VectorizeError::InvalidParams(what.to_string()));
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if self.window == 0 {
            return bad("window must be at least 1");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return bad("learning rate must be positive");
        }
        Ok(())
    }
}

/// Trained input vectors, one row per kept token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "TableRepr", into = "TableRepr")]
pub struct EmbeddingTable {
    dim: usize,
    terms: Vec<String>,
    index: HashMap<String, u32>,
    vectors: Vec<f32>,
    params: Word2VecParams,
}

#[derive(Serialize, Deserialize)]
struct TableRepr {
    dim: usize,
    terms: Vec<String>,
    vectors: Vec<f32>,
    params: Word2VecParams,
}

impl From<TableRepr> for EmbeddingTable {
    fn from(r: TableRepr) -> Self {
        let index = r.terms.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Self {
            dim: r.dim,
            terms: r.terms,
            index,
            vectors: r.vectors,
            params: r.params,
        }
    }
}

impl From<EmbeddingTable> for TableRepr {
    fn from(t: EmbeddingTable) -> Self {
        Self {
            dim: t.dim,
            terms: t.terms,
            vectors: t.vectors,
            params: t.params,
        }
    }
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn params(&self) -> &Word2VecParams {
        &self.params
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn vector(&self, token: &str) -> Option<&[f32]> {
        self.index.get(token).map(|&i| {
            let i = i as usize;
            &self.vectors[i * self.dim..(i + 1) * self.dim]
        })
    }

    /// Mean of the vectors of in-table tokens; zeros when none are known.
    pub fn embed(&self, doc: &TokenSequence) -> Vec<f64> {
        let mut sum = vec![0.0f64; self.dim];
        let mut n = 0usize;
        for v in doc.iter().filter_map(|t| self.vector(t)) {
            for (s, &x) in sum.iter_mut().zip(v) {
                *s += f64::from(x);
            }
            n += 1;
        }
        if n > 0 {
            let n = n as f64;
            sum.iter_mut().for_each(|s| *s /= n);
        }
        sum
    }
}

/// Free-function form of [`EmbeddingTable::embed`].
pub fn embed_document(table: &EmbeddingTable, doc: &TokenSequence) -> Vec<f64> {
    table.embed(doc)
}

fn sigmoid<F: Float>(x: F) -> F {
    F::one() / (F::one() + (-x).exp())
}

/// Derivative of the pair loss with respect to the score `input · output`:
/// `sigmoid(score) - 1` for the observed context, `sigmoid(score)` for a
/// negative sample.
pub fn score_gradient<F: Float>(score: F, positive: bool) -> F {
    let s = sigmoid(score);
    if positive {
        s - F::one()
    } else {
        s
    }
}

fn dot<F: Float>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Negative-sampling loss of one center word against its context and
/// negatives: `-ln σ(u_o·v) - Σ ln σ(-u_k·v)`.
pub fn pair_loss<F: Float>(input: &[F], outputs: &[(&[F], bool)]) -> F {
    outputs.iter().fold(F::zero(), |acc, &(u, positive)| {
        let s = dot(input, u);
        let p = if positive { sigmoid(s) } else { sigmoid(-s) };
        acc - p.ln()
    })
}

/// Analytic gradients of [`pair_loss`]: with respect to the input vector and
/// to each output vector, in order.
pub fn pair_gradients<F: Float>(input: &[F], outputs: &[(&[F], bool)]) -> (Vec<F>, Vec<Vec<F>>) {
    let mut d_input = vec![F::zero(); input.len()];
    let mut d_outputs = Vec::with_capacity(outputs.len());
    for &(u, positive) in outputs {
        let g = score_gradient(dot(input, u), positive);
        for (d, &x) in d_input.iter_mut().zip(u) {
            *d = *d + g * x;
        }
        d_outputs.push(input.iter().map(|&x| g * x).collect());
    }
    (d_input, d_outputs)
}

struct Trainer {
    dim: usize,
    input: Vec<f32>,
    output: Vec<f32>,
    grad_buf: Vec<f32>,
}

impl Trainer {
    /// One SGD step on a center word and its (context, negatives) targets.
    fn step(&mut self, center: usize, targets: &[(usize, bool)], lr: f32) {
        let dim = self.dim;
        self.grad_buf.iter_mut().for_each(|g| *g = 0.0);
        let v = &mut self.input[center * dim..(center + 1) * dim];
        for &(t, positive) in targets {
            let u = &mut self.output[t * dim..(t + 1) * dim];
            let g = score_gradient(dot(v, u), positive) * lr;
            for ((acc, uo), &vi) in self.grad_buf.iter_mut().zip(u.iter_mut()).zip(v.iter()) {
                *acc += g * *uo;
                *uo -= g * vi;
            }
        }
        for (vi, &acc) in v.iter_mut().zip(&self.grad_buf) {
            *vi -= acc;
        }
    }
}

/// Trains skip-gram embeddings. Tokens seen fewer than `min_count` times are
/// excluded from the table and skipped during training.
pub fn train_word2vec(docs: &[TokenSequence], params: &Word2VecParams) -> Result<EmbeddingTable, VectorizeError> {
    params.validate()?;
    if docs.iter().all(TokenSequence::is_empty) {
        return Err(VectorizeError::EmptyCorpus);
    }

    // vocabulary in first-appearance order
    let mut counts: HashMap<&str, usize> = HashMap::new();
    let mut order: Vec<&str> = Vec::new();
    for tok in docs.iter().flat_map(|d| d.iter()) {
        let c = counts.entry(tok.as_str()).or_insert_with(|| {
            order.push(tok.as_str());
            0
        });
        *c += 1;
    }
    let terms: Vec<String> = order
        .into_iter()
        .filter(|t| counts[t] >= params.min_count)
        .map(str::to_string)
        .collect();
    if terms.is_empty() {
        return Err(VectorizeError::NoTokensAboveMinCount(params.min_count));
    }
    let index: HashMap<String, u32> = terms.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
    let sentences: Vec<Vec<usize>> = docs
        .iter()
        .map(|d| d.iter().filter_map(|t| index.get(t).map(|&i| i as usize)).collect())
        .collect();

    let dim = params.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let half = 0.5 / dim as f32;
    let input: Vec<f32> = (0..terms.len() * dim).map(|_| rng.gen_range(-half..half)).collect();
    let mut trainer = Trainer {
        dim,
        input,
        output: vec![0.0; terms.len() * dim],
        grad_buf: vec![0.0; dim],
    };
    let noise = WeightedIndex::new(terms.iter().map(|t| (counts[t.as_str()] as f64).powf(0.75)))
        .expect("vocabulary is non-empty with positive counts");

    let total = (sentences.iter().map(Vec::len).sum::<usize>() * params.epochs).max(1) as f32;
    let mut processed = 0usize;
    let mut targets: Vec<(usize, bool)> = Vec::with_capacity(params.negative + 1);
    for _ in 0..params.epochs {
        for sent in &sentences {
            for (pos, &center) in sent.iter().enumerate() {
                let lr = params.learning_rate * (1.0 - processed as f32 / total).max(1e-4);
                processed += 1;
                let reach = rng.gen_range(1..=params.window);
                let lo = pos.saturating_sub(reach);
                let hi = (pos + reach).min(sent.len() - 1);
                for (ctx_pos, &context) in sent.iter().enumerate().take(hi + 1).skip(lo) {
                    if ctx_pos == pos {
                        continue;
                    }
                    targets.clear();
                    targets.push((context, true));
                    for _ in 0..params.negative {
                        let neg = noise.sample(&mut rng);
                        if neg != context {
                            targets.push((neg, false));
                        }
                    }
                    trainer.step(center, &targets, lr);
                }
            }
        }
    }

    Ok(EmbeddingTable {
        dim,
        terms,
        index,
        vectors: trainer.input,
        params: *params,
    })
}
