//! Token sequences to numeric feature vectors.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textprep::TokenSequence;

mod sparse;
pub mod tfidf;
pub mod word2vec;

pub use sparse::SparseVector;
pub use tfidf::{fit_tfidf, transform_tfidf, TfIdfModel};
pub use word2vec::{embed_document, train_word2vec, EmbeddingTable, Word2VecParams};

#[derive(Debug, Error)]
pub enum VectorizeError {
    #[error("corpus has no tokens")]
    EmptyCorpus,
    #[error("no token occurs at least {0} times")]
    NoTokensAboveMinCount(usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("sparse index {index} out of order or not below dim {dim}")]
    BadSparseIndex { index: usize, dim: usize },
}

/// What a fitted TF-IDF vocabulary emits per document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TfIdfOutput {
    /// tf x idf weights
    #[default]
    Weights,
    /// raw in-vocabulary token counts
    Counts,
}

/// A fitted featurizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Vectorizer {
    Tfidf { model: TfIdfModel, output: TfIdfOutput },
    Word2vec { table: EmbeddingTable },
}

impl Vectorizer {
    pub fn tag(&self) -> &'static str {
        match self {
            Vectorizer::Tfidf { .. } => "tfidf",
            Vectorizer::Word2vec { .. } => "word2vec",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Vectorizer::Tfidf { model, .. } => model.vocab_size(),
            Vectorizer::Word2vec { table } => table.dim(),
        }
    }

    pub fn transform(&self, doc: &TokenSequence) -> SparseVector {
        match self {
            Vectorizer::Tfidf {
                model,
                output: TfIdfOutput::Weights,
            } => model.transform(doc),
            Vectorizer::Tfidf {
                model,
                output: TfIdfOutput::Counts,
            } => model.transform_counts(doc),
            Vectorizer::Word2vec { table } => SparseVector::from_dense(&table.embed(doc)),
        }
    }
}
