//! TF-IDF with `tf = count / doc_len` and `idf = ln(n_docs / df)`.
//!
//! No smoothing: a token present in every document gets idf 0 and tokens
//! never seen at fit time contribute nothing at transform time.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{SparseVector, VectorizeError};
use crate::textprep::TokenSequence;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "TfIdfRepr", into = "TfIdfRepr")]
pub struct TfIdfModel {
    terms: Vec<String>,
    index: HashMap<String, u32>,
    doc_freq: Vec<u32>,
    idf: Vec<f64>,
    n_docs: usize,
    normalize: bool,
}

#[derive(Serialize, Deserialize)]
struct TfIdfRepr {
    terms: Vec<String>,
    doc_freq: Vec<u32>,
    idf: Vec<f64>,
    n_docs: usize,
    normalize: bool,
}

impl From<TfIdfRepr> for TfIdfModel {
    fn from(r: TfIdfRepr) -> Self {
        let index = r.terms.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Self {
            terms: r.terms,
            index,
            doc_freq: r.doc_freq,
            idf: r.idf,
            n_docs: r.n_docs,
            normalize: r.normalize,
        }
    }
}

impl From<TfIdfModel> for TfIdfRepr {
    fn from(m: TfIdfModel) -> Self {
        Self {
            terms: m.terms,
            doc_freq: m.doc_freq,
            idf: m.idf,
            n_docs: m.n_docs,
            normalize: m.normalize,
        }
    }
}

/// Fits vocabulary, document frequencies and idf weights. Columns are
/// numbered in order of first appearance.
pub fn fit_tfidf(docs: &[TokenSequence]) -> Result<TfIdfModel, VectorizeError> {
    if docs.iter().all(TokenSequence::is_empty) {
        return Err(VectorizeError::EmptyCorpus);
    }
    let mut index: HashMap<String, u32> = HashMap::new();
    let mut terms = Vec::new();
    let mut doc_freq: Vec<u32> = Vec::new();
    let mut last_seen: Vec<usize> = Vec::new();
    for (d, doc) in docs.iter().enumerate() {
        for tok in doc {
            let col = match index.get(tok) {
                Some(&c) => c as usize,
                None => {
                    let c = terms.len();
                    index.insert(tok.clone(), c as u32);
                    terms.push(tok.clone());
                    doc_freq.push(0);
                    last_seen.push(usize::MAX);
                    c
                }
            };
            if last_seen[col] != d {
                last_seen[col] = d;
                doc_freq[col] += 1;
            }
        }
    }
    let n_docs = docs.len();
    let idf = doc_freq.iter().map(|&df| idf_weight(n_docs, df)).collect();
    Ok(TfIdfModel {
        terms,
        index,
        doc_freq,
        idf,
        n_docs,
        normalize: false,
    })
}

fn idf_weight(n_docs: usize, df: u32) -> f64 {
    (n_docs as f64 / df as f64).ln()
}

impl TfIdfModel {
    pub fn vocab_size(&self) -> usize {
        self.terms.len()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn column(&self, token: &str) -> Option<usize> {
        self.index.get(token).map(|&c| c as usize)
    }

    pub fn doc_freq(&self, token: &str) -> Option<u32> {
        self.column(token).map(|c| self.doc_freq[c])
    }

    pub fn idf(&self, token: &str) -> Option<f64> {
        self.column(token).map(|c| self.idf[c])
    }

    pub fn idf_weights(&self) -> &[f64] {
        &self.idf
    }

    pub fn normalizes(&self) -> bool {
        self.normalize
    }

    /// Enables L2 row normalization of transformed vectors (off by default).
    pub fn with_normalization(mut self, on: bool) -> Self {
        self.normalize = on;
        self
    }

    /// Keeps only the `max_features` columns with the highest document
    /// frequency (ties broken by column order). Surviving columns keep their
    /// relative order.
    pub fn prune_top_df(&self, max_features: usize) -> TfIdfModel {
        if max_features >= self.terms.len() {
            return self.clone();
        }
        let mut order: Vec<usize> = (0..self.terms.len()).collect();
        order.sort_by(|&a, &b| self.doc_freq[b].cmp(&self.doc_freq[a]).then(a.cmp(&b)));
        let mut keep = order[..max_features].to_vec();
        keep.sort_unstable();
        let terms: Vec<String> = keep.iter().map(|&c| self.terms[c].clone()).collect();
        TfIdfModel {
            index: terms.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect(),
            terms,
            doc_freq: keep.iter().map(|&c| self.doc_freq[c]).collect(),
            idf: keep.iter().map(|&c| self.idf[c]).collect(),
            n_docs: self.n_docs,
            normalize: self.normalize,
        }
    }

    /// Per-column occurrence counts of in-vocabulary tokens.
    fn column_counts(&self, doc: &TokenSequence) -> Vec<(u32, u32)> {
        let mut counts: HashMap<u32, u32> = HashMap::new();
        for tok in doc {
            if let Some(&c) = self.index.get(tok) {
                *counts.entry(c).or_insert(0) += 1;
            }
        }
        let mut counts: Vec<_> = counts.into_iter().collect();
        counts.sort_unstable_by_key(|&(c, _)| c);
        counts
    }

    /// TF-IDF vector of one document. The tf denominator is the full
    /// document length, out-of-vocabulary tokens included.
    pub fn transform(&self, doc: &TokenSequence) -> SparseVector {
        if doc.is_empty() {
            return SparseVector::zeros(self.vocab_size());
        }
        let len = doc.len() as f64;
        let (indices, values): (Vec<u32>, Vec<f64>) = self
            .column_counts(doc)
            .into_iter()
            .map(|(c, n)| (c, n as f64 / len * self.idf[c as usize]))
            .filter(|&(_, v)| v != 0.0)
            .unzip();
        let mut v = SparseVector::from_sorted_unchecked(self.vocab_size(), indices, values);
        if self.normalize {
            v.normalize_l2();
        }
        v
    }

    /// Raw in-vocabulary token counts.
    pub fn transform_counts(&self, doc: &TokenSequence) -> SparseVector {
        let (indices, values) = self.column_counts(doc).into_iter().map(|(c, n)| (c, n as f64)).unzip();
        SparseVector::from_sorted_unchecked(self.vocab_size(), indices, values)
    }
}

/// Free-function form of [`TfIdfModel::transform`].
pub fn transform_tfidf(model: &TfIdfModel, doc: &TokenSequence) -> SparseVector {
    model.transform(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(words: &[&str]) -> TokenSequence {
        words.iter().map(|w| w.to_string()).collect()
    }

    fn hand_corpus() -> Vec<TokenSequence> {
        vec![seq(&["money", "money", "free"]), seq(&["meeting", "today"])]
    }

    #[test]
    fn fit_hand_corpus() {
        let m = fit_tfidf(&hand_corpus()).unwrap();
        assert_eq!(m.n_docs(), 2);
        assert_eq!(m.doc_freq("money"), Some(1));
        assert!((m.idf("money").unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(m.terms(), ["money", "free", "meeting", "today"]);
    }

    #[test]
    fn transform_hand_doc() {
        let m = fit_tfidf(&hand_corpus()).unwrap();
        let v = m.transform(&seq(&["money", "money", "free"]));
        // (2/3) ln 2 = 0.462098...
        assert!((v.get(0) - 0.462_098_120_373_296_9).abs() < 1e-12);
        assert!((v.get(1) - std::f64::consts::LN_2 / 3.0).abs() < 1e-12);
        assert_eq!(v.nnz(), 2);
    }

    #[test]
    fn ubiquitous_token_has_zero_idf() {
        let m = fit_tfidf(&[seq(&["a", "b"]), seq(&["a", "c"])]).unwrap();
        assert_eq!(m.idf("a"), Some(0.0));
        assert_eq!(m.transform(&seq(&["a"])).nnz(), 0);
    }

    #[test]
    fn single_document_corpus_is_all_zero() {
        let m = fit_tfidf(&[seq(&["x", "y", "x"])]).unwrap();
        assert!(m.idf_weights().iter().all(|&w| w == 0.0));
        assert_eq!(m.transform(&seq(&["x", "y"])).nnz(), 0);
    }

    #[test]
    fn oov_and_empty_docs() {
        let m = fit_tfidf(&hand_corpus()).unwrap();
        assert_eq!(m.transform(&seq(&["zzz", "qqq"])).nnz(), 0);
        let e = m.transform(&TokenSequence::default());
        assert_eq!(e.nnz(), 0);
        assert_eq!(e.dim(), 4);
    }

    #[test]
    fn oov_tokens_count_in_length() {
        let m = fit_tfidf(&hand_corpus()).unwrap();
        let v = m.transform(&seq(&["money", "zzz"]));
        assert!((v.get(0) - std::f64::consts::LN_2 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_corpus() {
        assert!(matches!(fit_tfidf(&[]), Err(VectorizeError::EmptyCorpus)));
        assert!(matches!(fit_tfidf(&[TokenSequence::default()]), Err(VectorizeError::EmptyCorpus)));
    }

    #[test]
    fn counts() {
        let m = fit_tfidf(&hand_corpus()).unwrap();
        let v = m.transform_counts(&seq(&["money", "money", "today", "zzz"]));
        assert_eq!(v.to_dense(), [2.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn prune_keeps_highest_df() {
        let docs = [seq(&["a", "b", "c"]), seq(&["c", "b"]), seq(&["c", "d"])];
        let m = fit_tfidf(&docs).unwrap().prune_top_df(2);
        assert_eq!(m.terms(), ["b", "c"]);
        assert_eq!(m.doc_freq("c"), Some(3));
        assert_eq!(m.n_docs(), 3);
        let v = m.transform(&seq(&["b", "a"]));
        assert_eq!(v.dim(), 2);
        assert!((v.get(0) - 0.5 * (1.5f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn normalization_flag() {
        let m = fit_tfidf(&hand_corpus()).unwrap().with_normalization(true);
        let v = m.transform(&seq(&["money", "free"]));
        assert!((v.squared_norm() - 1.0).abs() < 1e-12);
    }

    fn corpus_strategy() -> impl Strategy<Value = Vec<Vec<String>>> {
        prop::collection::vec(prop::collection::vec("[a-e]{1,2}", 0..12), 1..8)
    }

    proptest! {
        #[test]
        fn values_nonnegative_and_in_range(raw in corpus_strategy()) {
            let docs: Vec<TokenSequence> = raw.into_iter().map(TokenSequence::new).collect();
            prop_assume!(docs.iter().any(|d| !d.is_empty()));
            let m = fit_tfidf(&docs).unwrap();
            for d in &docs {
                let v = m.transform(d);
                for (i, x) in v.iter() {
                    prop_assert!((i as usize) < m.vocab_size());
                    prop_assert!(x > 0.0);
                }
            }
            for (t, &w) in m.terms().iter().zip(m.idf_weights()) {
                let df = m.doc_freq(t).unwrap() as usize;
                prop_assert!(df >= 1 && df <= m.n_docs());
                prop_assert!(w >= 0.0);
            }
        }

        #[test]
        fn tf_is_scale_invariant(raw in corpus_strategy(), k in 1usize..5) {
            let docs: Vec<TokenSequence> = raw.into_iter().map(TokenSequence::new).collect();
            prop_assume!(docs.iter().any(|d| !d.is_empty()));
            let m = fit_tfidf(&docs).unwrap();
            for d in &docs {
                let repeated: TokenSequence = (0..k).flat_map(|_| d.iter().cloned()).collect();
                let a = m.transform(d);
                let b = m.transform(&repeated);
                prop_assert_eq!(a.indices(), b.indices());
                for (x, y) in a.values().iter().zip(b.values()) {
                    prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
                }
            }
        }
    }
}
