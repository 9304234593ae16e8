//! Multinomial naive Bayes with additive (Laplace) smoothing.

use serde::{Deserialize, Serialize};

use super::{both_classes, check_training_data, sigmoid, ClassifierError, Prediction};
use crate::corpus::Label;
use crate::vectorize::SparseVector;

/// Per-class parameters are indexed `[ham, spam]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnbModel {
    log_prior: [f64; 2],
    log_likelihood: [Vec<f64>; 2],
    alpha: f64,
    n_features: usize,
}

fn class_index(l: Label) -> usize {
    l.as_u8() as usize
}

/// Fits class priors and smoothed per-class feature likelihoods:
/// `P(w | c) = (count(w, c) + α) / (total(c) + α V)`.
///
/// Inputs are expected to be counts (or any non-negative weights).
pub fn train_mnb(x: &[SparseVector], y: &[Label], alpha: f64) -> Result<MnbModel, ClassifierError> {
    if alpha.is_nan() || alpha <= 0.0 || alpha.is_infinite() {
        return Err(ClassifierError::InvalidHyperparameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let dim = check_training_data(x, y, 1)?;
    both_classes(y)?;

    let mut counts = [vec![0.0f64; dim], vec![0.0f64; dim]];
    let mut docs = [0usize; 2];
    for (xi, &yi) in x.iter().zip(y) {
        let c = class_index(yi);
        docs[c] += 1;
        for (j, v) in xi.iter() {
            if v < 0.0 {
                return Err(ClassifierError::NegativeFeature {
                    column: j as usize,
                    value: v,
                });
            }
            counts[c][j as usize] += v;
        }
    }
    let n = x.len() as f64;
    let v = dim as f64;
    let log_likelihood = counts.map(|row| {
        let total: f64 = row.iter().sum();
        let denom = (total + alpha * v).ln();
        row.into_iter().map(|cnt| (cnt + alpha).ln() - denom).collect()
    });
    Ok(MnbModel {
        log_prior: docs.map(|d| (d as f64 / n).ln()),
        log_likelihood,
        alpha,
        n_features: dim,
    })
}

impl MnbModel {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn log_prior(&self, class: Label) -> f64 {
        self.log_prior[class_index(class)]
    }

    pub fn log_likelihoods(&self, class: Label) -> &[f64] {
        &self.log_likelihood[class_index(class)]
    }

    /// Unnormalized log posterior of `class` for `x`.
    pub fn joint_log_likelihood(&self, x: &SparseVector, class: Label) -> f64 {
        let c = class_index(class);
        self.log_prior[c] + x.dot_dense(&self.log_likelihood[c])
    }

    /// Score is the normalized spam posterior; margin is the log-odds.
    pub fn predict(&self, x: &SparseVector) -> Prediction {
        let margin = self.joint_log_likelihood(x, Label::Spam) - self.joint_log_likelihood(x, Label::Ham);
        Prediction::from_score(sigmoid(margin), margin)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(v: &[f64]) -> SparseVector {
        SparseVector::from_dense(v)
    }

    // vocabulary: cheap pills meds project meeting
    fn hand_model() -> MnbModel {
        let x = [
            counts(&[1.0, 1.0, 0.0, 0.0, 0.0]),
            counts(&[1.0, 0.0, 1.0, 0.0, 0.0]),
            counts(&[0.0, 0.0, 0.0, 1.0, 1.0]),
        ];
        train_mnb(&x, &[Label::Spam, Label::Spam, Label::Ham], 1.0).unwrap()
    }

    #[test]
    fn laplace_hand_values() {
        let m = hand_model();
        assert!((m.log_likelihoods(Label::Spam)[0].exp() - 3.0 / 9.0).abs() < 1e-12);
        assert!((m.log_likelihoods(Label::Ham)[0].exp() - 1.0 / 7.0).abs() < 1e-12);
        assert!((m.log_prior(Label::Spam).exp() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn hand_posterior() {
        let m = hand_model();
        let doc = counts(&[1.0, 0.0, 0.0, 0.0, 1.0]);
        let spam = m.joint_log_likelihood(&doc, Label::Spam);
        let ham = m.joint_log_likelihood(&doc, Label::Ham);
        assert!((spam - (2.0f64 / 81.0).ln()).abs() < 1e-12);
        assert!((ham - (2.0f64 / 147.0).ln()).abs() < 1e-12);
        let p = m.predict(&doc);
        assert_eq!(p.label, Label::Spam);
        // 147 / (147 + 81)
        assert!((p.score - 147.0 / 228.0).abs() < 1e-12);
    }

    #[test]
    fn likelihoods_normalize() {
        let m = hand_model();
        for c in [Label::Ham, Label::Spam] {
            let s: f64 = m.log_likelihoods(c).iter().map(|l| l.exp()).sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn symmetric_tie_is_spam() {
        let x = [counts(&[1.0, 1.0]), counts(&[1.0, 1.0])];
        let m = train_mnb(&x, &[Label::Spam, Label::Ham], 1.0).unwrap();
        let p = m.predict(&counts(&[1.0, 0.0]));
        assert_eq!(p.score, 0.5);
        assert_eq!(p.label, Label::Spam);
    }

    #[test]
    fn argmax_invariant_under_count_offset() {
        // spam leans on feature 0, ham on feature 1; adding the same count to
        // every feature in both classes keeps each side's winner
        let base = [[3.0, 1.0], [1.0, 3.0]];
        for offset in [0.0, 1.0, 5.0] {
            let x: Vec<SparseVector> = base.iter().map(|r| counts(&[r[0] + offset, r[1] + offset])).collect();
            let m = train_mnb(&x, &[Label::Spam, Label::Ham], 1.0).unwrap();
            assert_eq!(m.predict(&counts(&[1.0, 0.0])).label, Label::Spam);
            assert_eq!(m.predict(&counts(&[0.0, 1.0])).label, Label::Ham);
        }
    }

    #[test]
    fn errors() {
        let x = [counts(&[1.0, -1.0]), counts(&[1.0, 0.0])];
        assert!(matches!(
            train_mnb(&x, &[Label::Spam, Label::Ham], 1.0),
            Err(ClassifierError::NegativeFeature { column: 1, .. })
        ));
        let x = [counts(&[1.0, 1.0]), counts(&[1.0, 0.0])];
        assert_eq!(train_mnb(&x, &[Label::Ham, Label::Ham], 1.0), Err(ClassifierError::SingleClassData));
        assert!(matches!(
            train_mnb(&x, &[Label::Spam, Label::Ham], 0.0),
            Err(ClassifierError::InvalidHyperparameter(_))
        ));
    }
}
