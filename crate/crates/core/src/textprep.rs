//! Tokenization and stop-word filtering.
//!
//! Text is lowercased and split into maximal runs of ASCII letters and digits.
//! Everything else (punctuation, whitespace, symbols, non-ASCII letters) acts
//! as a separator, so `shel.cooper@caltech.edu` becomes
//! `["shel", "cooper", "caltech", "edu"]`. No stemming is applied.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// The English stop-word list shipped with the crate, one word per line.
pub const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

/// Version tag of [`DEFAULT_STOPWORDS`]; bump whenever the list changes.
pub const DEFAULT_STOPWORDS_VERSION: &str = "en-1";

/// Ordered, preprocessed tokens of one document.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    pub fn new(tokens: Vec<String>) -> Self {
        Self(tokens)
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }

    /// Tokens joined with single spaces.
    pub fn join(&self) -> String {
        self.0.join(" ")
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }
}

impl FromIterator<String> for TokenSequence {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a TokenSequence {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Preprocessing settings. Serialized into pipeline artifacts so that serving
/// applies exactly the preprocessing used at training time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrepConfig {
    stopwords: BTreeSet<String>,
    lowercase: bool,
    min_token_len: usize,
}

impl Default for PrepConfig {
    fn default() -> Self {
        Self::with_stopwords(parse_stopword_list(DEFAULT_STOPWORDS))
    }
}

impl PrepConfig {
    /// Builds a config around the given stop words. Entries are normalized
    /// through the tokenizer, so `"Don't"` contributes `don` and `t`.
    pub fn with_stopwords<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let stopwords = words
            .into_iter()
            .flat_map(|w| split_tokens(w.as_ref(), true).collect::<Vec<_>>())
            .collect();
        Self {
            stopwords,
            lowercase: true,
            min_token_len: 1,
        }
    }

    /// No stop words at all.
    pub fn without_stopwords() -> Self {
        Self::with_stopwords(std::iter::empty::<&str>())
    }

    /// Loads a plain-text stop-word file (one word per line, `#` comments).
    pub fn from_stopword_file(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::with_stopwords(parse_stopword_list(&text)))
    }

    pub fn lowercase(mut self, on: bool) -> Self {
        self.lowercase = on;
        self
    }

    /// Minimum token length in bytes; values below 1 are treated as 1.
    pub fn min_token_len(mut self, len: usize) -> Self {
        self.min_token_len = len.max(1);
        self
    }

    pub fn stopwords(&self) -> &BTreeSet<String> {
        &self.stopwords
    }

    pub fn is_lowercase(&self) -> bool {
        self.lowercase
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token)
    }
}

fn parse_stopword_list(text: &str) -> Vec<&str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

/// Maximal runs of ASCII alphanumerics, optionally lowercased.
fn split_tokens(raw: &str, lowercase: bool) -> impl Iterator<Item = String> + '_ {
    raw.split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(move |s| if lowercase { s.to_ascii_lowercase() } else { s.to_string() })
}

/// Tokenizes `raw` and drops stop words and tokens shorter than the
/// configured minimum. Stop-word matching is case-insensitive.
pub fn preprocess(raw: &str, config: &PrepConfig) -> TokenSequence {
    split_tokens(raw, config.lowercase)
        .filter(|t| t.len() >= config.min_token_len)
        .filter(|t| {
            if config.lowercase {
                !config.is_stopword(t)
            } else {
                !config.is_stopword(&t.to_ascii_lowercase())
            }
        })
        .collect()
}

/// Like [`preprocess`], also returning each kept token's byte range in `raw`.
pub fn preprocess_with_spans(raw: &str, config: &PrepConfig) -> Vec<(String, std::ops::Range<usize>)> {
    let mut out = Vec::new();
    let bytes = raw.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if !bytes[i].is_ascii_alphanumeric() {
            i += 1;
            continue;
        }
        let start = i;
        while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
            i += 1;
        }
        let piece = &raw[start..i];
        let lower = piece.to_ascii_lowercase();
        if piece.len() >= config.min_token_len && !config.is_stopword(&lower) {
            let tok = if config.lowercase { lower } else { piece.to_string() };
            out.push((tok, start..i));
        }
    }
    out
}
