//! Acceptance gate for the HTTP service. Prints one line per criterion and
//! exits non-zero on failure.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use axum::http::StatusCode;
use common::{call, fig5_email, fixtures, json, keys};
use mailsift::artifact::{PipelineArtifact, TrainingMetadata};
use mailsift::corpus::{self, synthetic, CorpusSchema};
use mailsift::pipeline::{self, TrainConfig};
use mailsift::PrepConfig;
use serde_json::{json, Value};

const SYNTHETIC_PER_CLASS: usize = 200;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn unit(v: &Value, what: &str) -> Result<f64, String> {
    let x = v.as_f64().ok_or_else(|| format!("{what} is not a number: {v}"))?;
    ensure((0.0..=1.0).contains(&x), format!("{what} = {x} outside [0, 1]"))?;
    Ok(x)
}

fn train() -> Result<PipelineArtifact, String> {
    let loaded = corpus::load_manifest(fixtures().join("manifest.txt")).map_err(|e| e.to_string())?;
    let mut input = corpus::into_merge_input(loaded);
    input.push((
        synthetic::generate(SYNTHETIC_PER_CLASS, SYNTHETIC_PER_CLASS, 7),
        CorpusSchema::SubjectBody,
    ));
    let c = corpus::merge_corpora(&input).map_err(|e| e.to_string())?;
    let texts: Vec<&str> = c.texts().collect();
    let pipe = pipeline::train(&texts, &c.labels(), PrepConfig::default(), &TrainConfig::default()).map_err(|e| e.to_string())?;
    Ok(PipelineArtifact::new(
        pipe,
        TrainingMetadata {
            corpus_fingerprint: c.fingerprint(),
            dataset: "fixture+synthetic".into(),
            synthetic_per_class: SYNTHETIC_PER_CLASS,
            ..TrainingMetadata::default()
        },
    ))
}

async fn service_contract() -> Result<String, String> {
    let app = common::app(Some(train()?));
    let email = fig5_email();

    let (status, bytes) = call(&app, "POST", "/predict", json!({ "text": email }).to_string()).await;
    ensure(status == StatusCode::OK, format!("/predict status {status}"))?;
    let p = json(&bytes);
    ensure(keys(&p) == ["label", "model", "score"], format!("/predict keys {:?}", keys(&p)))?;
    let label = p["label"].as_str().unwrap_or_default();
    ensure(label == "spam" || label == "ham", format!("label {label:?}"))?;
    ensure(p["model"].is_string(), "model is not a string")?;
    let score = unit(&p["score"], "score")?;

    let (status, bytes) = call(
        &app,
        "POST",
        "/explain",
        json!({ "text": email, "top_k": 10, "seed": 42 }).to_string(),
    )
    .await;
    ensure(status == StatusCode::OK, format!("/explain status {status}"))?;
    let e = json(&bytes);
    ensure(
        keys(&e) == ["fit", "probabilities", "tokens"],
        format!("/explain keys {:?}", keys(&e)),
    )?;
    ensure(keys(&e["probabilities"]) == ["ham", "spam"], "probabilities keys")?;
    let spam = unit(&e["probabilities"]["spam"], "p(spam)")?;
    let ham = unit(&e["probabilities"]["ham"], "p(ham)")?;
    ensure((spam + ham - 1.0).abs() < 1e-9, format!("probabilities sum to {}", spam + ham))?;
    ensure(
        (spam - score).abs() < 1e-12,
        format!("explain p(spam) {spam} vs predict score {score}"),
    )?;
    unit(&e["fit"], "fit")?;
    let tokens = e["tokens"].as_array().ok_or("tokens is not an array")?;
    ensure(!tokens.is_empty() && tokens.len() <= 10, format!("{} tokens", tokens.len()))?;
    for t in tokens {
        ensure(keys(t) == ["position", "token", "weight"], format!("token keys {:?}", keys(t)))?;
        ensure(
            t["token"].is_string() && t["position"].is_u64() && t["weight"].is_f64(),
            format!("token entry {t}"),
        )?;
    }

    for (route, payload) in [
        ("/predict", json!({ "text": "" })),
        ("/explain", json!({ "text": "x", "top_k": 0 })),
    ] {
        let (status, bytes) = call(&app, "POST", route, payload.to_string()).await;
        ensure(status == StatusCode::BAD_REQUEST, format!("{route} invalid input gave {status}"))?;
        ensure(keys(&json(&bytes)) == ["error"], "error body")?;
    }

    ensure(label == "spam", format!("Fig. 5 email classified as {label} (score {score:.4})"))?;
    Ok(format!("Fig. 5 -> spam, score {score:.4}, {} explained tokens", tokens.len()))
}

fn main() -> ExitCode {
    let limit = Duration::from_secs(60);
    let rt = tokio::runtime::Runtime::new().expect("tokio runtime");
    let start = Instant::now();
    let result = rt.block_on(service_contract());
    let elapsed = start.elapsed();
    let timing = format!("{:.2}s, limit {}s", elapsed.as_secs_f64(), limit.as_secs());
    let (ok, detail) = match result {
        Ok(d) if elapsed <= limit => (true, format!("{d} [{timing}]")),
        Ok(d) => (false, format!("{d} [too slow: {timing}]")),
        Err(e) => (false, format!("{e} [{timing}]")),
    };
    println!("{}  service contract: {detail}", if ok { "PASS" } else { "FAIL" });
    println!("acceptance: 1 criteria, {} failed", u8::from(!ok));
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
