//! Train/test splitting, confusion matrices and the accuracy / precision /
//! recall / F1 metrics. Spam is the positive class.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("test ratio must lie strictly between 0 and 1, got {0}")]
    BadRatio(f64),
    #[error("cannot split an empty corpus")]
    EmptyCorpus,
    #[error("{predicted} predictions but {truth} truth labels")]
    LengthMismatch { predicted: usize, truth: usize },
    #[error("no examples to evaluate")]
    EmptyInput,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Number of training examples: `floor(n * (1 - ratio))`. The test set takes
/// the remainder, so 82,486 at 0.2 splits 65,988 / 16,498.
pub fn train_size(n: usize, test_ratio: f64) -> usize {
    // the epsilon absorbs representation error in products like 10 * 0.8
    ((n as f64 * (1.0 - test_ratio)) + 1e-9).floor() as usize
}

/// Seeded Fisher-Yates shuffle of `0..n`; the first `train_size` indices
/// train, the rest test.
pub fn split(n: usize, test_ratio: f64, seed: u64) -> Result<Split, EvalError> {
    if !(test_ratio > 0.0 && test_ratio < 1.0) {
        return Err(EvalError::BadRatio(test_ratio));
    }
    if n == 0 {
        return Err(EvalError::EmptyCorpus);
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = idx.split_off(train_size(n, test_ratio));
    Ok(Split { train: idx, test })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn record(&mut self, predicted: Label, truth: Label) {
        match (predicted, truth) {
            (Label::Spam, Label::Spam) => self.tp += 1,
            (Label::Spam, Label::Ham) => self.fp += 1,
            (Label::Ham, Label::Ham) => self.tn += 1,
            (Label::Ham, Label::Spam) => self.fn_ += 1,
        }
    }
}

pub fn confusion(predicted: &[Label], truth: &[Label]) -> Result<ConfusionMatrix, EvalError> {
    if predicted.len() != truth.len() {
        return Err(EvalError::LengthMismatch {
            predicted: predicted.len(),
            truth: truth.len(),
        });
    }
    if predicted.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in predicted.iter().zip(truth) {
        cm.record(p, t);
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Metrics of a confusion matrix. Any ratio with a zero denominator is 0.
pub fn metrics(cm: &ConfusionMatrix) -> Metrics {
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Metrics {
        accuracy: ratio(cm.tp + cm.tn, cm.total()),
        precision,
        recall,
        f1,
    }
}

/// One result row: which data, features and model produced which metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: String,
    pub vectorizer: String,
    pub model: String,
    pub metrics: Metrics,
}

pub const CSV_HEADER: &str = "dataset,vectorizer,model,accuracy,precision,recall,f1";

impl ReportRow {
    pub fn to_csv(&self) -> String {
        let m = &self.metrics;
        format!(
            "{},{},{},{:.4},{:.4},{:.4},{:.4}",
            csv_field(&self.dataset),
            csv_field(&self.vectorizer),
            csv_field(&self.model),
            m.accuracy,
            m.precision,
            m.recall,
            m.f1
        )
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Aligned plain-text table of report rows.
pub fn render_table(rows: &[ReportRow]) -> String {
    let headers = ["dataset", "vectorizer", "model", "accuracy", "precision", "recall", "f1"];
    let cells: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            let m = &r.metrics;
            [
                r.dataset.clone(),
                r.vectorizer.clone(),
                r.model.clone(),
                format!("{:.4}", m.accuracy),
                format!("{:.4}", m.precision),
                format!("{:.4}", m.recall),
                format!("{:.4}", m.f1),
            ]
        })
        .collect();
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, items: &[&str]| {
        let parts: Vec<String> = items.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&mut out, &headers);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    let _ = writeln!(out, "{}", rule.join("  "));
    for row in &cells {
        let refs: Vec<&str> = row.iter().map(String::as_str).collect();
        line(&mut out, &refs);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Label::{Ham, Spam};

    #[test]
    fn split_sizes() {
        let s = split(10, 0.2, 42).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (8, 2));
        let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_eq!(train_size(82_486, 0.2), 65_988);
    }

    #[test]
    fn split_is_deterministic() {
        assert_eq!(split(100, 0.3, 7).unwrap(), split(100, 0.3, 7).unwrap());
        assert_ne!(split(100, 0.3, 7).unwrap(), split(100, 0.3, 8).unwrap());
    }

    #[test]
    fn split_errors() {
        assert_eq!(split(10, 0.0, 1), Err(EvalError::BadRatio(0.0)));
        assert_eq!(split(10, 1.0, 1), Err(EvalError::BadRatio(1.0)));
        assert!(matches!(split(10, f64::NAN, 1), Err(EvalError::BadRatio(_))));
        assert_eq!(split(0, 0.2, 1), Err(EvalError::EmptyCorpus));
    }

    #[test]
    fn confusion_counts() {
        let cm = confusion(&[Spam, Spam, Ham], &[Spam, Ham, Ham]).unwrap();
        assert_eq!(
            cm,
            ConfusionMatrix {
                tp: 1,
                fp: 1,
                tn: 1,
                fn_: 0
            }
        );
        let cm = confusion(&[Spam; 4], &[Spam; 4]).unwrap();
        assert_eq!((cm.fp, cm.fn_), (0, 0));
        assert!(matches!(confusion(&[Spam], &[]), Err(EvalError::LengthMismatch { .. })));
        assert_eq!(confusion(&[], &[]), Err(EvalError::EmptyInput));
    }

    #[test]
    fn hand_built_ten() {
        // 2 tp, 1 fp, 1 fn, 6 tn enumerated pair by pair
        let pairs = [
            (Spam, Spam),
            (Spam, Spam),
            (Spam, Ham),
            (Ham, Spam),
            (Ham, Ham),
            (Ham, Ham),
            (Ham, Ham),
            (Ham, Ham),
            (Ham, Ham),
            (Ham, Ham),
        ];
        let (p, t): (Vec<_>, Vec<_>) = pairs.iter().copied().unzip();
        let cm = confusion(&p, &t).unwrap();
        assert_eq!(
            cm,
            ConfusionMatrix {
                tp: 2,
                fp: 1,
                tn: 6,
                fn_: 1
            }
        );
        let m = metrics(&cm);
        assert!((m.accuracy - 0.8).abs() < 1e-12);
        assert!((m.precision - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.recall - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_conventions() {
        let m = metrics(&ConfusionMatrix {
            tp: 0,
            fp: 0,
            tn: 5,
            fn_: 0,
        });
        assert_eq!(m.accuracy, 1.0);
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn report_rendering() {
        let row = ReportRow {
            dataset: "fix,ture".into(),
            vectorizer: "tfidf".into(),
            model: "svm".into(),
            metrics: metrics(&ConfusionMatrix {
                tp: 2,
                fp: 1,
                tn: 6,
                fn_: 1,
            }),
        };
        assert_eq!(row.to_csv(), "\"fix,ture\",tfidf,svm,0.8000,0.6667,0.6667,0.6667");
        let table = render_table(&[row]);
        assert!(table.starts_with("dataset"));
        assert!(table.contains("0.8000"));
        assert_eq!(table.lines().count(), 3);
    }

    proptest! {
        #[test]
        fn metrics_bounds(tp in 0u64..50, fp in 0u64..50, tn in 0u64..50, fn_ in 0u64..50) {
            prop_assume!(tp + fp + tn + fn_ > 0);
            let m = metrics(&ConfusionMatrix { tp, fp, tn, fn_ });
            for v in [m.accuracy, m.precision, m.recall, m.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            if m.precision > 0.0 && m.recall > 0.0 {
                prop_assert!(m.f1 <= m.precision.max(m.recall) + 1e-12);
                prop_assert!(m.f1 >= m.precision.min(m.recall) - 1e-12);
            }
        }
    }
}
