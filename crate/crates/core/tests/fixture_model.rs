mod common;

use mailsift::explain::{explain, token_spans, ExplainConfig};
use mailsift::pipeline::{ModelKind, TrainConfig, VectorizerKind};
use mailsift::Label;

#[test]
fn fig5_email_is_spam_for_every_tfidf_model() {
    let text = common::fig5_email();
    for model in [ModelKind::Svm, ModelKind::Mnb, ModelKind::Rf] {
        let pipe = common::train_fixture_model(&TrainConfig::new(VectorizerKind::Tfidf, model));
        let p = pipe.predict_text(&text).unwrap();
        assert_eq!(p.label, Label::Spam, "{model}: score {}", p.score);
        assert!(p.score > 0.5);
    }
}

#[test]
fn explanation_agrees_with_prediction() {
    let pipe = common::train_fixture_model(&TrainConfig::default());
    let text = common::fig5_email();
    let p = pipe.predict_text(&text).unwrap();
    let e = explain(&pipe, &text, &ExplainConfig::default()).unwrap();
    assert!((e.class_probs.spam - p.score).abs() < 1e-9);
    assert!((e.class_probs.ham + e.class_probs.spam - 1.0).abs() < 1e-9);
    assert!(e.class_probs.spam > 0.5);
}

#[test]
fn fig7_token_directions() {
    // request and urgency words push toward spam; the .edu address toward ham
    let pipe = common::train_fixture_model(&TrainConfig::default());
    let text = common::fig5_email();
    let cfg = ExplainConfig {
        top_k: 200,
        ..ExplainConfig::default()
    };
    let e = explain(&pipe, &text, &cfg).unwrap();
    let weight = |tok: &str| {
        e.token_weights
            .iter()
            .find(|t| t.token == tok)
            .map(|t| t.weight)
            .unwrap_or_else(|| panic!("{tok} missing"))
    };
    for tok in ["scan", "miss", "phone"] {
        assert!(weight(tok) > 0.0, "{tok}: {}", weight(tok));
    }
    assert!(weight("edu") < 0.0, "edu: {}", weight("edu"));
}

#[test]
fn spans_point_at_explained_tokens() {
    let pipe = common::train_fixture_model(&TrainConfig::default());
    let text = common::fig5_email();
    let spans = token_spans(&pipe, &text);
    let tokens = pipe.tokenize(&text);
    assert_eq!(spans.len(), tokens.len());
    for (range, tok) in spans.iter().zip(tokens.iter()) {
        assert_eq!(&text[range.clone()].to_ascii_lowercase(), tok);
    }
}
