#![allow(dead_code)]

use std::path::PathBuf;

use mailsift::corpus::{self, synthetic, CorpusSchema};
use mailsift::pipeline::{self, Pipeline, TrainConfig};
use mailsift::{Corpus, Label, PrepConfig};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture_corpus() -> Corpus {
    let datasets = corpus::load_manifest(fixture("manifest.txt")).expect("fixture manifest loads");
    corpus::merge_corpora(&corpus::into_merge_input(datasets)).expect("fixture corpus merges")
}

pub fn fig5_email() -> String {
    std::fs::read_to_string(fixture("fig5_email.txt")).expect("fig5 fixture")
}

/// The shipped fixture corpus extended with synthetic template emails.
pub fn fixture_plus_synthetic(n_each: usize, seed: u64) -> (Vec<String>, Vec<Label>) {
    let fixture = fixture_corpus();
    let synth = corpus::merge_corpora(&[(synthetic::generate(n_each, n_each, seed), CorpusSchema::SubjectBody)]).expect("synthetic corpus");
    let mut texts: Vec<String> = fixture.texts().map(str::to_string).collect();
    let mut labels = fixture.labels();
    texts.extend(synth.texts().map(str::to_string));
    labels.extend(synth.labels());
    (texts, labels)
}

pub fn train_fixture_model(config: &TrainConfig) -> Pipeline {
    let (texts, labels) = fixture_plus_synthetic(150, 7);
    pipeline::train(&texts, &labels, PrepConfig::default(), config).expect("fixture model trains")
}
