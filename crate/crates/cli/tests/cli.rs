mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::fixtures;
use mailsift::artifact::{self, PipelineArtifact, TrainingMetadata};
use mailsift::classifiers::{ClassifierModel, SvmModel};
use mailsift::pipeline::Pipeline;
use mailsift::vectorize::{fit_tfidf, TfIdfOutput, Vectorizer};
use mailsift::{preprocess, PrepConfig};
use serde_json::Value;

fn mailsift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mailsift")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn ok(o: Output) -> String {
    assert!(
        o.status.success(),
        "exit {:?}: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stderr)
    );
    stdout(&o)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn train_fixture(dir: &Path) -> std::path::PathBuf {
    let out = dir.join("model.msft");
    let manifest = fixtures().join("manifest.txt");
    ok(mailsift(&[
        "train",
        "--manifest",
        path(&manifest),
        "--synthetic",
        "150",
        "--out",
        path(&out),
        "--json",
    ]));
    out
}

#[test]
fn train_evaluate_predict_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_fixture(dir.path());
    let manifest = fixtures().join("manifest.txt");

    let art = artifact::load_artifact(&model).unwrap();
    let snapshot = art.metadata.metrics.expect("metrics snapshot");
    assert_eq!(art.metadata.synthetic_per_class, 150);

    let report: Value = serde_json::from_str(&ok(mailsift(&[
        "evaluate",
        "--artifact",
        path(&model),
        "--manifest",
        path(&manifest),
        "--json",
    ])))
    .unwrap();
    let m = &report["row"]["metrics"];
    for (key, want) in [
        ("accuracy", snapshot.accuracy),
        ("precision", snapshot.precision),
        ("recall", snapshot.recall),
        ("f1", snapshot.f1),
    ] {
        assert_eq!(m[key].as_f64().unwrap(), want, "{key}");
        assert!((0.0..=1.0).contains(&want));
    }

    let fig5 = fixtures().join("fig5_email.txt");
    let v: Value = serde_json::from_str(&ok(mailsift(&[
        "predict",
        "--artifact",
        path(&model),
        "--file",
        path(&fig5),
        "--json",
    ])))
    .unwrap();
    assert_eq!(v["label"], "spam");
    assert!(v["score"].as_f64().unwrap() > 0.5);
    let mut keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    keys.sort();
    assert_eq!(keys, ["label", "model", "score"]);

    let text = ok(mailsift(&["predict", "--artifact", path(&model), "--file", path(&fig5)]));
    assert!(text.starts_with("spam"), "{text}");
}

#[test]
fn reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = fixtures().join("manifest.txt");
    let run = |name: &str| {
        ok(mailsift(&[
            "train",
            "--manifest",
            path(&manifest),
            "--synthetic",
            "40",
            "--model",
            "rf",
            "--rf-trees",
            "15",
            "--seed",
            "9",
            "--out",
            path(&dir.path().join(name)),
        ]))
    };
    let a = run("a.msft");
    assert_eq!(a, run("b.msft"));
    assert!(a.contains("dataset,vectorizer,model,accuracy,precision,recall,f1"));
    assert!(a.contains("manifest,tfidf,rf,"));
}

#[test]
fn explain_is_deterministic_with_seed() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_fixture(dir.path());
    let fig5 = fixtures().join("fig5_email.txt");
    let args = [
        "explain",
        "--artifact",
        path(&model),
        "--file",
        path(&fig5),
        "--seed",
        "7",
        "--json",
    ];
    let a = ok(mailsift(&args));
    assert_eq!(a, ok(mailsift(&args)));
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["tokens"].as_array().unwrap().len(), 10);
    let text = ok(mailsift(&[
        "explain",
        "--artifact",
        path(&model),
        "--text",
        "urgent verify your password now",
        "--top-k",
        "2",
    ]));
    assert_eq!(text.lines().count(), 3, "{text}");
}

/// Ten emails under a model that flags exactly the ones mentioning "offer":
/// tp 2, fp 1, fn 1, tn 6, so accuracy (2 + 6) / 10.
#[test]
fn stub_model_ten_example_report() {
    let dir = tempfile::tempdir().unwrap();
    let rows = [
        ("Special offer", "cheap watches", 1),
        ("Great offer", "limited stock", 1),
        ("Prize", "claim your reward", 1),
        ("Offer letter", "signed contract attached", 0),
        ("Lunch", "noon at the cafe", 0),
        ("Agenda", "project meeting notes", 0),
        ("Slides", "seminar recording", 0),
        ("Trip", "train tickets booked", 0),
        ("Review", "paper comments", 0),
        ("Grades", "final exam results", 0),
    ];
    let mut csv = String::from("subject,body,label\n");
    for (s, b, l) in rows {
        csv.push_str(&format!("{s},{b},{l}\n"));
    }
    std::fs::write(dir.path().join("ten.csv"), csv).unwrap();
    let manifest = dir.path().join("ten.txt");
    std::fs::write(&manifest, "ten.csv subject_body\n").unwrap();

    let prep = PrepConfig::default();
    let docs: Vec<_> = rows.iter().map(|(s, b, _)| preprocess(&format!("{s} {b}"), &prep)).collect();
    let tfidf = fit_tfidf(&docs).unwrap();
    let mut w = vec![0.0; tfidf.vocab_size()];
    w[tfidf.column("offer").unwrap()] = 10.0;
    let pipe = Pipeline::new(
        prep,
        Vectorizer::Tfidf {
            model: tfidf,
            output: TfIdfOutput::Weights,
        },
        ClassifierModel::Svm(SvmModel::from_parts(w, -1e-3)),
    )
    .unwrap();
    let model = dir.path().join("stub.msft");
    artifact::save_artifact(&PipelineArtifact::new(pipe, TrainingMetadata::default()), &model).unwrap();

    let out = ok(mailsift(&[
        "evaluate",
        "--artifact",
        path(&model),
        "--manifest",
        path(&manifest),
        "--all",
    ]));
    assert!(out.contains("ten,tfidf,svm,0.8000,0.6667,0.6667,0.6667"), "{out}");
    assert!(out.contains("tp 2 fp 1 tn 6 fn 1"), "{out}");
    let v: Value = serde_json::from_str(&ok(mailsift(&[
        "evaluate",
        "--artifact",
        path(&model),
        "--manifest",
        path(&manifest),
        "--all",
        "--json",
    ])))
    .unwrap();
    assert_eq!(v["row"]["metrics"]["accuracy"].as_f64().unwrap(), 0.8);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_fixture(dir.path());
    let manifest = fixtures().join("manifest.txt");

    assert_eq!(
        mailsift(&["predict", "--artifact", path(&model), "--text", " "]).status.code(),
        Some(2)
    );
    assert_eq!(
        mailsift(&["predict", "--artifact", path(&model), "--text", "!!!"]).status.code(),
        Some(2)
    );
    assert_eq!(mailsift(&["train", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(
        mailsift(&["train", "--manifest", path(&manifest), "--out", "x", "--test-ratio", "1.5"])
            .status
            .code(),
        Some(2)
    );
    let missing = dir.path().join("missing.txt");
    assert_eq!(
        mailsift(&["train", "--manifest", path(&missing), "--out", "x"]).status.code(),
        Some(3)
    );
    assert_eq!(
        mailsift(&["predict", "--artifact", path(&missing), "--text", "hi"]).status.code(),
        Some(4)
    );

    // a truncated artifact
    let bytes = std::fs::read(&model).unwrap();
    let broken = dir.path().join("broken.msft");
    std::fs::write(&broken, &bytes[..bytes.len() / 2]).unwrap();
    assert_eq!(
        mailsift(&["predict", "--artifact", path(&broken), "--text", "hi"]).status.code(),
        Some(4)
    );
}

#[test]
fn mismatched_dimensions_are_an_artifact_error() {
    let dir = tempfile::tempdir().unwrap();
    let prep = PrepConfig::default();
    let tfidf = fit_tfidf(&[preprocess("cheap pills", &prep), preprocess("team meeting", &prep)]).unwrap();
    let good = Pipeline::new(
        prep,
        Vectorizer::Tfidf {
            model: tfidf,
            output: TfIdfOutput::Weights,
        },
        ClassifierModel::Svm(SvmModel::from_parts(vec![0.0; 4], 0.0)),
    )
    .unwrap();
    // swap in a classifier of the wrong width through the serialized form
    let mut v = serde_json::to_value(PipelineArtifact::new(good, TrainingMetadata::default())).unwrap();
    v["pipeline"]["classifier"]["weights"] = serde_json::json!([0.0, 0.0, 0.0]);
    let payload = serde_json::to_vec(&v).unwrap();
    let mut bytes = b"MSFT1".to_vec();
    bytes.extend_from_slice(&1u32.to_le_bytes());
    bytes.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&crc32(&payload).to_le_bytes());
    bytes.extend_from_slice(&payload);
    let model = dir.path().join("bad.msft");
    std::fs::write(&model, bytes).unwrap();

    let manifest = fixtures().join("manifest.txt");
    let o = mailsift(&["evaluate", "--artifact", path(&model), "--manifest", path(&manifest)]);
    assert_eq!(o.status.code(), Some(4));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("dimension") || err.contains("expected"), "{err}");
}

/// Bitwise CRC-32 (IEEE), independent of the crate used by the writer.
fn crc32(data: &[u8]) -> u32 {
    let mut crc = !0u32;
    for &b in data {
        crc ^= b as u32;
        for _ in 0..8 {
            crc = if crc & 1 != 0 { (crc >> 1) ^ 0xEDB8_8320 } else { crc >> 1 };
        }
    }
    !crc
}
