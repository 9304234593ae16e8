#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use mailsift::artifact::{PipelineArtifact, TrainingMetadata};
use mailsift::corpus::{self, synthetic, CorpusSchema};
use mailsift::pipeline::{self, TrainConfig};
use mailsift::PrepConfig;
use mailsift_cli::service::{router, AppState, Cors};
use tower::ServiceExt;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

pub fn fig5_email() -> String {
    std::fs::read_to_string(fixtures().join("fig5_email.txt")).unwrap()
}

/// The 60-email fixture corpus plus 150 synthetic emails per class.
pub fn fixture_artifact() -> PipelineArtifact {
    let mut input = corpus::into_merge_input(corpus::load_manifest(fixtures().join("manifest.txt")).unwrap());
    input.push((synthetic::generate(150, 150, 7), CorpusSchema::SubjectBody));
    let c = corpus::merge_corpora(&input).unwrap();
    let texts: Vec<&str> = c.texts().collect();
    let pipe = pipeline::train(&texts, &c.labels(), PrepConfig::default(), &TrainConfig::default()).unwrap();
    PipelineArtifact::new(
        pipe,
        TrainingMetadata {
            corpus_fingerprint: c.fingerprint(),
            dataset: "fixture+synthetic".into(),
            ..TrainingMetadata::default()
        },
    )
}

pub fn app(artifact: Option<PipelineArtifact>) -> Router {
    let state = match artifact {
        Some(a) => AppState::new(a),
        None => AppState::empty(),
    };
    router(Arc::new(state), Cors::SameOrigin)
}

pub async fn call(app: &Router, method: &str, uri: &str, body: impl Into<Body>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.into())
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

pub fn json(bytes: &[u8]) -> serde_json::Value {
    serde_json::from_slice(bytes).unwrap_or_else(|e| panic!("not JSON ({e}): {}", String::from_utf8_lossy(bytes)))
}

/// Keys of a JSON object, sorted.
pub fn keys(v: &serde_json::Value) -> Vec<&str> {
    let mut k: Vec<&str> = v.as_object().expect("object").keys().map(String::as_str).collect();
    k.sort_unstable();
    k
}
