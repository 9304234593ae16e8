//! The three spam classifiers and their shared prediction type.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;
use crate::vectorize::SparseVector;

pub mod forest;
pub mod mnb;
pub mod svm;

pub use forest::{train_rf, DecisionTree, Node, RfModel, RfParams};
pub use mnb::{train_mnb, MnbModel};
pub use svm::{train_svm, SvmModel, SvmParams};

#[derive(Debug, Error, PartialEq)]
pub enum ClassifierError {
    #[error("training data contains a single class")]
    SingleClassData,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("{features} feature rows but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("need at least {0} training examples")]
    TooFewExamples(usize),
    #[error("negative feature value {value} at column {column}")]
    NegativeFeature { column: usize, value: f64 },
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
}

/// Output of any classifier for one feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    /// Spam-probability estimate in `[0, 1]`.
    pub score: f64,
    /// Raw model output before mapping to `score`.
    pub margin: f64,
}

/// Decision threshold; a score exactly at the threshold is spam.
pub const THRESHOLD: f64 = 0.5;

impl Prediction {
    pub fn from_score(score: f64, margin: f64) -> Self {
        Self {
            label: Label::from(score >= THRESHOLD),
            score,
            margin,
        }
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Shared training-input checks; returns the feature dimension.
pub(crate) fn check_training_data(x: &[SparseVector], y: &[Label], min_examples: usize) -> Result<usize, ClassifierError> {
    if x.len() != y.len() {
        return Err(ClassifierError::LengthMismatch {
            features: x.len(),
            labels: y.len(),
        });
    }
    if x.len() < min_examples {
        return Err(ClassifierError::TooFewExamples(min_examples));
    }
    let dim = x[0].dim();
    if let Some(bad) = x.iter().find(|v| v.dim() != dim) {
        return Err(ClassifierError::DimensionMismatch {
            expected: dim,
            actual: bad.dim(),
        });
    }
    Ok(dim)
}

pub(crate) fn both_classes(y: &[Label]) -> Result<(), ClassifierError> {
    if y.iter().any(|l| l.is_spam()) && y.iter().any(|l| !l.is_spam()) {
        Ok(())
    } else {
        Err(ClassifierError::SingleClassData)
    }
}

/// A trained classifier of any supported kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierModel {
    Svm(SvmModel),
    Mnb(MnbModel),
    Rf(RfModel),
}

impl ClassifierModel {
    pub fn tag(&self) -> &'static str {
        match self {
            ClassifierModel::Svm(_) => "svm",
            ClassifierModel::Mnb(_) => "mnb",
            ClassifierModel::Rf(_) => "rf",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ClassifierModel::Svm(m) => m.dim(),
            ClassifierModel::Mnb(m) => m.n_features(),
            ClassifierModel::Rf(m) => m.dim(),
        }
    }

    pub fn predict(&self, x: &SparseVector) -> Result<Prediction, ClassifierError> {
        if x.dim() != self.dim() {
            return Err(ClassifierError::DimensionMismatch {
                expected: self.dim(),
                actual: x.dim(),
            });
        }
        Ok(match self {
            ClassifierModel::Svm(m) => m.predict(x),
            ClassifierModel::Mnb(m) => m.predict(x),
            ClassifierModel::Rf(m) => m.predict(x),
        })
    }
}

/// Free-function form of [`ClassifierModel::predict`].
pub fn predict(model: &ClassifierModel, x: &SparseVector) -> Result<Prediction, ClassifierError> {
    model.predict(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tie_goes_to_spam() {
        assert_eq!(Prediction::from_score(0.5, 0.0).label, Label::Spam);
        assert_eq!(Prediction::from_score(0.4999, 0.0).label, Label::Ham);
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-1000.0) >= 0.0);
        assert!(sigmoid(1000.0) <= 1.0);
        assert!((sigmoid(2.0) + sigmoid(-2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn predict_checks_dimension() {
        let m = ClassifierModel::Svm(SvmModel::from_parts(vec![0.0; 3], 0.0));
        let err = m.predict(&SparseVector::zeros(4)).unwrap_err();
        assert_eq!(err, ClassifierError::DimensionMismatch { expected: 3, actual: 4 });
    }
}
