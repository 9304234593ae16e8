use mailsift::artifact::ArtifactError;
use mailsift::classifiers::ClassifierError;
use mailsift::explain::ExplainError;
use thiserror::Error;

/// Every failure a command can end in, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Artifact(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Artifact(_) => 4,
            CliError::Internal(_) => 5,
        }
    }
}

impl From<mailsift::Error> for CliError {
    fn from(e: mailsift::Error) -> Self {
        use mailsift::Error as E;
        match e {
            E::Artifact(a) => a.into(),
            E::Explain(x) => x.into(),
            E::Classifier(c @ ClassifierError::DimensionMismatch { .. }) => CliError::Artifact(c.to_string()),
            E::Classifier(c @ ClassifierError::InvalidHyperparameter(_)) => CliError::Usage(c.to_string()),
            E::Vectorize(v @ mailsift::vectorize::VectorizeError::InvalidParams(_)) => CliError::Usage(v.to_string()),
            E::Eval(v @ mailsift::eval::EvalError::BadRatio(_)) => CliError::Usage(v.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<mailsift::corpus::CorpusError> for CliError {
    fn from(e: mailsift::corpus::CorpusError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ArtifactError> for CliError {
    fn from(e: ArtifactError) -> Self {
        CliError::Artifact(e.to_string())
    }
}

impl From<ClassifierError> for CliError {
    fn from(e: ClassifierError) -> Self {
        mailsift::Error::from(e).into()
    }
}

impl From<ExplainError> for CliError {
    fn from(e: ExplainError) -> Self {
        match e {
            ExplainError::EmptyDocument | ExplainError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            ExplainError::ModelVectorizerMismatch(_) => CliError::Artifact(e.to_string()),
        }
    }
}
