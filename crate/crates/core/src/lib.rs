//! Spam and phishing email classification.
//!
//! The crate covers the whole offline path from raw CSV corpora to a trained,
//! serializable pipeline:
//!
//! - [`corpus`]: dataset ingestion and `text_combined` harmonization
//! - [`textprep`]: tokenization and stop-word removal
//! - [`vectorize`]: TF-IDF and skip-gram word2vec features
//! - [`classifiers`]: linear SVM, multinomial naive Bayes, random forest
//! - [`eval`]: splitting and accuracy / precision / recall / F1
//! - [`explain`]: perturbation-based local explanations
//! - [`pipeline`] and [`artifact`]: training glue and the on-disk format
//!
//! Nothing here touches the clock, the network or OS randomness, so the crate
//! also builds for `wasm32-unknown-unknown` (without the `parallel` feature).

pub mod artifact;
pub mod classifiers;
pub mod corpus;
pub mod eval;
pub mod explain;
pub mod pipeline;
pub mod textprep;
pub mod vectorize;

use thiserror::Error;

pub use classifiers::{ClassifierModel, Prediction};
pub use corpus::{Corpus, CorpusSchema, EmailRecord, Label};
pub use explain::{ExplainConfig, Explanation};
pub use pipeline::{ModelKind, Pipeline, TrainConfig, VectorizerKind};
pub use textprep::{preprocess, PrepConfig, TokenSequence};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Corpus(#[from] corpus::CorpusError),
    #[error(transparent)]
    Vectorize(#[from] vectorize::VectorizeError),
    #[error(transparent)]
    Classifier(#[from] classifiers::ClassifierError),
    #[error(transparent)]
    Eval(#[from] eval::EvalError),
    #[error(transparent)]
    Explain(#[from] explain::ExplainError),
    #[error(transparent)]
    Artifact(#[from] artifact::ArtifactError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
