//! A fitted preprocessing + vectorizer + classifier chain, and the training
//! routine that builds one from labeled texts.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifiers::{self, ClassifierError, ClassifierModel, Prediction, RfParams, SvmParams};
use crate::corpus::Label;
use crate::eval::{self, ConfusionMatrix};
use crate::textprep::{preprocess, PrepConfig, TokenSequence};
use crate::vectorize::{fit_tfidf, train_word2vec, SparseVector, TfIdfOutput, Vectorizer, Word2VecParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorizerKind {
    Tfidf,
    Word2vec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Svm,
    Mnb,
    Rf,
}

/// Feature values handed to naive Bayes when the vectorizer is TF-IDF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MnbInput {
    /// tf-idf weights (clipped at zero)
    #[default]
    Tfidf,
    /// raw token counts over the tf-idf vocabulary
    Counts,
}

macro_rules! tag_enum {
    ($ty:ty { $($variant:ident => $tag:literal),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s.to_ascii_lowercase().as_str() {
                    $($tag => Ok(<$ty>::$variant),)+
                    other => Err(format!("unknown value `{other}`")),
                }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(<$ty>::$variant => $tag,)+ })
            }
        }
    };
}

tag_enum!(VectorizerKind { Tfidf => "tfidf", Word2vec => "word2vec" });
tag_enum!(ModelKind { Svm => "svm", Mnb => "mnb", Rf => "rf" });
tag_enum!(MnbInput { Tfidf => "tfidf", Counts => "counts" });

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub vectorizer: VectorizerKind,
    pub model: ModelKind,
    pub svm: SvmParams,
    pub mnb_alpha: f64,
    pub mnb_input: MnbInput,
    pub rf: RfParams,
    /// Vocabulary cap (top columns by document frequency) applied to TF-IDF
    /// features when training a random forest. `None` disables it.
    pub rf_feature_cap: Option<usize>,
    pub word2vec: Word2VecParams,
    pub tfidf_normalize: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            vectorizer: VectorizerKind::Tfidf,
            model: ModelKind::Svm,
            svm: SvmParams::default(),
            mnb_alpha: 1.0,
            mnb_input: MnbInput::default(),
            rf: RfParams::default(),
            rf_feature_cap: Some(20_000),
            word2vec: Word2VecParams::default(),
            tfidf_normalize: false,
        }
    }
}

impl TrainConfig {
    pub fn new(vectorizer: VectorizerKind, model: ModelKind) -> Self {
        Self {
            vectorizer,
            model,
            ..Self::default()
        }
    }
}

/// Everything needed to go from raw text to a [`Prediction`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    prep: PrepConfig,
    vectorizer: Vectorizer,
    classifier: ClassifierModel,
}

impl Pipeline {
    /// Assembles a pipeline, checking that the classifier was trained on
    /// features of the vectorizer's dimension.
    pub fn new(prep: PrepConfig, vectorizer: Vectorizer, classifier: ClassifierModel) -> Result<Self, ClassifierError> {
        let p = Self {
            prep,
            vectorizer,
            classifier,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ClassifierError> {
        if self.vectorizer.dim() != self.classifier.dim() {
            return Err(ClassifierError::DimensionMismatch {
                expected: self.classifier.dim(),
                actual: self.vectorizer.dim(),
            });
        }
        Ok(())
    }

    pub fn prep(&self) -> &PrepConfig {
        &self.prep
    }

    pub fn vectorizer(&self) -> &Vectorizer {
        &self.vectorizer
    }

    pub fn classifier(&self) -> &ClassifierModel {
        &self.classifier
    }

    /// `"<vectorizer>+<model>"`, e.g. `tfidf+svm`.
    pub fn describe(&self) -> String {
        format!("{}+{}", self.vectorizer.tag(), self.classifier.tag())
    }

    pub fn tokenize(&self, raw: &str) -> TokenSequence {
        preprocess(raw, &self.prep)
    }

    pub fn featurize(&self, tokens: &TokenSequence) -> SparseVector {
        let v = self.vectorizer.transform(tokens);
        match self.classifier {
            ClassifierModel::Mnb(_) => v.clip_nonnegative(),
            _ => v,
        }
    }

    pub fn predict_tokens(&self, tokens: &TokenSequence) -> Result<Prediction, ClassifierError> {
        self.classifier.predict(&self.featurize(tokens))
    }

    pub fn predict_text(&self, raw: &str) -> Result<Prediction, ClassifierError> {
        self.predict_tokens(&self.tokenize(raw))
    }

    /// Confusion matrix of this pipeline over labeled texts.
    pub fn evaluate<S: AsRef<str> + Sync>(&self, texts: &[S], truth: &[Label]) -> crate::Result<ConfusionMatrix> {
        let predicted = self.predict_many(texts)?;
        Ok(eval::confusion(&predicted, truth)?)
    }

    pub fn predict_many<S: AsRef<str> + Sync>(&self, texts: &[S]) -> Result<Vec<Label>, ClassifierError> {
        let one = |t: &S| self.predict_text(t.as_ref()).map(|p| p.label);
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            texts.par_iter().map(one).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            texts.iter().map(one).collect()
        }
    }
}

fn tokenize_all<S: AsRef<str> + Sync>(texts: &[S], prep: &PrepConfig) -> Vec<TokenSequence> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        texts.par_iter().map(|t| preprocess(t.as_ref(), prep)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        texts.iter().map(|t| preprocess(t.as_ref(), prep)).collect()
    }
}

/// Fits the vectorizer on `texts` only, then trains the chosen classifier on
/// the resulting features.
pub fn train<S: AsRef<str> + Sync>(texts: &[S], labels: &[Label], prep: PrepConfig, config: &TrainConfig) -> crate::Result<Pipeline> {
    let docs = tokenize_all(texts, &prep);
    let vectorizer = match config.vectorizer {
        VectorizerKind::Tfidf => {
            let mut model = fit_tfidf(&docs)?.with_normalization(config.tfidf_normalize);
            if let (ModelKind::Rf, Some(cap)) = (config.model, config.rf_feature_cap) {
                model = model.prune_top_df(cap);
            }
            let output = match (config.model, config.mnb_input) {
                (ModelKind::Mnb, MnbInput::Counts) => TfIdfOutput::Counts,
                _ => TfIdfOutput::Weights,
            };
            Vectorizer::Tfidf { model, output }
        }
        VectorizerKind::Word2vec => Vectorizer::Word2vec {
            table: train_word2vec(&docs, &config.word2vec)?,
        },
    };
    let features: Vec<SparseVector> = {
        let tf = |d: &TokenSequence| {
            let v = vectorizer.transform(d);
            if config.model == ModelKind::Mnb {
                v.clip_nonnegative()
            } else {
                v
            }
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            docs.par_iter().map(tf).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            docs.iter().map(tf).collect()
        }
    };
    let classifier = match config.model {
        ModelKind::Svm => ClassifierModel::Svm(classifiers::train_svm(&features, labels, &config.svm)?),
        ModelKind::Mnb => ClassifierModel::Mnb(classifiers::train_mnb(&features, labels, config.mnb_alpha)?),
        ModelKind::Rf => ClassifierModel::Rf(classifiers::train_rf(&features, labels, &config.rf)?),
    };
    Ok(Pipeline::new(prep, vectorizer, classifier)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::synthetic;

    fn data() -> (Vec<String>, Vec<Label>) {
        let recs = synthetic::generate(60, 60, 3);
        let texts = recs
            .iter()
            .map(|r| crate::corpus::combine_text(r, crate::CorpusSchema::SubjectBody))
            .collect();
        (texts, recs.iter().map(|r| r.label).collect())
    }

    #[test]
    fn every_combination_trains() {
        let (texts, labels) = data();
        for v in [VectorizerKind::Tfidf, VectorizerKind::Word2vec] {
            for m in [ModelKind::Svm, ModelKind::Mnb, ModelKind::Rf] {
                let mut cfg = TrainConfig::new(v, m);
                cfg.rf.n_trees = 10;
                cfg.word2vec = Word2VecParams {
                    dim: 16,
                    epochs: 2,
                    ..Word2VecParams::default()
                };
                let p = train(&texts, &labels, PrepConfig::default(), &cfg).unwrap();
                assert_eq!(p.describe(), format!("{v}+{m}"));
                let s = p.predict_text(&texts[0]).unwrap().score;
                assert!((0.0..=1.0).contains(&s));
            }
        }
    }

    #[test]
    fn tfidf_svm_separates_templates() {
        let (texts, labels) = data();
        let p = train(&texts, &labels, PrepConfig::default(), &TrainConfig::default()).unwrap();
        let cm = p.evaluate(&texts, &labels).unwrap();
        assert_eq!(cm.fp + cm.fn_, 0);
    }

    #[test]
    fn mnb_count_input() {
        let (texts, labels) = data();
        let mut cfg = TrainConfig::new(VectorizerKind::Tfidf, ModelKind::Mnb);
        cfg.mnb_input = MnbInput::Counts;
        let p = train(&texts, &labels, PrepConfig::default(), &cfg).unwrap();
        assert!(matches!(
            p.vectorizer(),
            Vectorizer::Tfidf {
                output: TfIdfOutput::Counts,
                ..
            }
        ));
    }

    #[test]
    fn rf_cap_prunes_vocabulary() {
        let (texts, labels) = data();
        let mut cfg = TrainConfig::new(VectorizerKind::Tfidf, ModelKind::Rf);
        cfg.rf.n_trees = 3;
        cfg.rf_feature_cap = Some(25);
        let p = train(&texts, &labels, PrepConfig::default(), &cfg).unwrap();
        assert_eq!(p.vectorizer().dim(), 25);
    }

    #[test]
    fn mismatched_parts_rejected() {
        let (texts, labels) = data();
        let a = train(&texts, &labels, PrepConfig::default(), &TrainConfig::default()).unwrap();
        let b = train(&texts[..40], &labels[..40], PrepConfig::default(), &TrainConfig::default()).unwrap();
        let err = Pipeline::new(PrepConfig::default(), a.vectorizer().clone(), b.classifier().clone()).unwrap_err();
        assert!(matches!(err, ClassifierError::DimensionMismatch { .. }));
    }

    #[test]
    fn tag_parsing() {
        assert_eq!("TFIDF".parse::<VectorizerKind>().unwrap(), VectorizerKind::Tfidf);
        assert_eq!("rf".parse::<ModelKind>().unwrap(), ModelKind::Rf);
        assert!("knn".parse::<ModelKind>().is_err());
        assert_eq!(MnbInput::Counts.to_string(), "counts");
    }
}
