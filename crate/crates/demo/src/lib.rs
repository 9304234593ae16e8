//! Browser demo: trains a small pipeline on the bundled fixture corpus plus
//! synthetic templates, then tokenizes, classifies and explains pasted text.
//!
//! All results cross the JS boundary as JSON strings.

use mailsift::corpus::{self, synthetic, CorpusSchema};
use mailsift::explain::{self, ExplainConfig, Explanation};
use mailsift::pipeline::{self, ModelKind, Pipeline, TrainConfig};
use mailsift::{preprocess, PrepConfig};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const FULL_HEADER: &str = include_str!("../../core/fixtures/mdf2_small.csv");
const SUBJECT_BODY: &str = include_str!("../../core/fixtures/mdf1_small.csv");

/// Synthetic emails added per class on top of the 60 fixture emails.
pub const SYNTHETIC_PER_CLASS: usize = 150;

#[derive(Debug, Serialize)]
pub struct PredictOutput {
    pub label: String,
    pub score: f64,
    pub model: String,
}

/// A run of the original text, with the weight of the token it covers.
#[derive(Debug, Serialize)]
pub struct Segment {
    pub text: String,
    pub weight: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct ExplainOutput {
    #[serde(flatten)]
    pub explanation: Explanation,
    pub segments: Vec<Segment>,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn model_kind(name: &str) -> Result<ModelKind, String> {
    match name {
        "svm" => Ok(ModelKind::Svm),
        "mnb" => Ok(ModelKind::Mnb),
        "rf" => Ok(ModelKind::Rf),
        other => Err(format!("unknown model {other:?}, expected svm, mnb or rf")),
    }
}

/// Trains a TF-IDF pipeline with the given classifier on the bundled data.
pub fn train_bundled(model: &str, seed: u64) -> Result<Pipeline, String> {
    let mut input = Vec::new();
    for (csv, schema, source) in [
        (FULL_HEADER, CorpusSchema::FullHeader, "mdf2_small"),
        (SUBJECT_BODY, CorpusSchema::SubjectBody, "mdf1_small"),
    ] {
        let ds = corpus::read_dataset(csv.as_bytes(), schema, source).map_err(err)?;
        input.push((ds.records, ds.schema));
    }
    input.push((
        synthetic::generate(SYNTHETIC_PER_CLASS, SYNTHETIC_PER_CLASS, seed),
        CorpusSchema::SubjectBody,
    ));
    let c = corpus::merge_corpora(&input).map_err(err)?;
    let texts: Vec<&str> = c.texts().collect();
    let mut cfg = TrainConfig::new(mailsift::VectorizerKind::Tfidf, model_kind(model)?);
    cfg.svm.seed = seed;
    cfg.rf.seed = seed;
    cfg.rf.n_trees = 30;
    pipeline::train(&texts, &c.labels(), PrepConfig::default(), &cfg).map_err(err)
}

/// Preprocessed tokens of `text` as a JSON array.
#[wasm_bindgen]
pub fn tokenize(text: &str) -> String {
    serde_json::to_string(preprocess(text, &PrepConfig::default()).tokens()).expect("strings serialize")
}

#[wasm_bindgen]
pub struct Demo {
    pipeline: Pipeline,
    model: String,
}

#[wasm_bindgen]
impl Demo {
    /// `model` is `"svm"`, `"mnb"` or `"rf"`.
    #[wasm_bindgen(constructor)]
    pub fn new(model: &str, seed: u64) -> Result<Demo, JsError> {
        Self::train(model, seed).map_err(|e| JsError::new(&e))
    }

    pub fn describe(&self) -> String {
        self.pipeline.describe()
    }

    /// `{"label","score","model"}`.
    pub fn predict(&self, text: &str) -> Result<String, JsError> {
        self.predict_json(text).map_err(|e| JsError::new(&e))
    }

    /// The explanation plus `segments` covering the whole input text.
    pub fn explain(&self, text: &str, top_k: usize, n_samples: usize, seed: u64) -> Result<String, JsError> {
        self.explain_json(text, top_k, n_samples, seed).map_err(|e| JsError::new(&e))
    }
}

impl Demo {
    pub fn train(model: &str, seed: u64) -> Result<Demo, String> {
        Ok(Demo {
            pipeline: train_bundled(model, seed)?,
            model: model.to_string(),
        })
    }

    pub fn predict_json(&self, text: &str) -> Result<String, String> {
        let tokens = self.pipeline.tokenize(text);
        if tokens.is_empty() {
            return Err("text has no analyzable tokens".into());
        }
        let p = self.pipeline.predict_tokens(&tokens).map_err(err)?;
        serde_json::to_string(&PredictOutput {
            label: p.label.name().into(),
            score: p.score,
            model: self.model.clone(),
        })
        .map_err(err)
    }

    pub fn explain_json(&self, text: &str, top_k: usize, n_samples: usize, seed: u64) -> Result<String, String> {
        let cfg = ExplainConfig {
            top_k: top_k.max(1),
            n_samples: n_samples.clamp(1, 5000),
            seed,
            ..ExplainConfig::default()
        };
        let explanation = explain::explain(&self.pipeline, text, &cfg).map_err(err)?;
        let segments = segments(text, &explain::token_spans(&self.pipeline, text), &explanation);
        serde_json::to_string(&ExplainOutput { explanation, segments }).map_err(err)
    }
}

/// Splits `text` at token spans so each explained token gets its own segment.
pub fn segments(text: &str, spans: &[std::ops::Range<usize>], e: &Explanation) -> Vec<Segment> {
    let mut out = Vec::new();
    let mut at = 0;
    let mut push = |s: &str, weight| {
        if !s.is_empty() {
            out.push(Segment {
                text: s.to_string(),
                weight,
            });
        }
    };
    let mut marked: Vec<(usize, f64)> = e.token_weights.iter().map(|tw| (tw.position, tw.weight)).collect();
    marked.sort_by_key(|m| m.0);
    for (pos, w) in marked {
        let Some(r) = spans.get(pos) else { continue };
        push(&text[at..r.start], None);
        push(&text[r.clone()], Some(w));
        at = r.end;
    }
    push(&text[at..], None);
    out
}
