//! Versioned, checksummed single-file pipeline artifacts.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//! 0       5     magic "MSFT1"
//! 5       4     format_version (u32)
//! 9       8     payload length in bytes (u64)
//! 17      4     CRC-32 of the payload (u32)
//! 21      n     payload: JSON-encoded pipeline and training metadata
//! ```
//!
//! Floats in the payload are written in shortest round-trip form, so a
//! loaded pipeline predicts bit-identically to the one that was saved.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::ClassifierError;
use crate::eval::Metrics;
use crate::pipeline::Pipeline;

pub const MAGIC: &[u8; 5] = b"MSFT1";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 5 + 4 + 8 + 4;

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("unsupported artifact format version {found} (this build reads {FORMAT_VERSION})")]
    UnsupportedVersion { found: u32 },
    #[error("corrupt artifact: {0}")]
    CorruptArtifact(String),
    #[error("artifact io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("artifact payload encoding failed: {0}")]
    Encode(String),
    #[error("artifact pipeline is inconsistent: {0}")]
    DimensionMismatch(ClassifierError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    /// Hex SHA-256 of the training corpus.
    pub corpus_fingerprint: String,
    pub dataset: String,
    pub split_seed: u64,
    pub test_ratio: f64,
    /// Synthetic template emails per class appended to the corpus, if any.
    #[serde(default)]
    pub synthetic_per_class: usize,
    #[serde(default)]
    pub synthetic_seed: u64,
    /// Held-out metrics measured right after training.
    pub metrics: Option<Metrics>,
    /// Unix seconds.
    pub created_at: u64,
}

impl Default for TrainingMetadata {
    fn default() -> Self {
        Self {
            corpus_fingerprint: String::new(),
            dataset: String::new(),
            split_seed: 42,
            test_ratio: 0.2,
            synthetic_per_class: 0,
            synthetic_seed: 0,
            metrics: None,
            created_at: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineArtifact {
    pub format_version: u32,
    pub pipeline: Pipeline,
    pub metadata: TrainingMetadata,
}

impl PipelineArtifact {
    pub fn new(pipeline: Pipeline, metadata: TrainingMetadata) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            pipeline,
            metadata,
        }
    }

    /// The classifier tag, e.g. `svm`.
    pub fn model_tag(&self) -> &'static str {
        self.pipeline.classifier().tag()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, ArtifactError> {
        let payload = serde_json::to_vec(self).map_err(|e| ArtifactError::Encode(e.to_string()))?;
        let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.format_version.to_le_bytes());
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());
        out.extend_from_slice(&payload);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ArtifactError> {
        let corrupt = |m: &str| ArtifactError::CorruptArtifact(m.to_string());
        if bytes.len() < HEADER_LEN {
            return Err(corrupt("truncated header"));
        }
        if &bytes[..5] != MAGIC {
            return Err(corrupt("bad magic bytes"));
        }
        let version = u32::from_le_bytes(bytes[5..9].try_into().expect("4 bytes"));
        if version != FORMAT_VERSION {
            return Err(ArtifactError::UnsupportedVersion { found: version });
        }
        let len = u64::from_le_bytes(bytes[9..17].try_into().expect("8 bytes"));
        let crc = u32::from_le_bytes(bytes[17..21].try_into().expect("4 bytes"));
        let payload = &bytes[HEADER_LEN..];
        if payload.len() as u64 != len {
            return Err(corrupt("payload length does not match header"));
        }
        if crc32fast::hash(payload) != crc {
            return Err(corrupt("checksum mismatch"));
        }
        let artifact: PipelineArtifact =
            serde_json::from_slice(payload).map_err(|e| ArtifactError::CorruptArtifact(format!("payload: {e}")))?;
        if artifact.format_version != version {
            return Err(corrupt("payload version disagrees with header"));
        }
        artifact.pipeline.validate().map_err(ArtifactError::DimensionMismatch)?;
        Ok(artifact)
    }
}

pub fn save_artifact(artifact: &PipelineArtifact, path: impl AsRef<Path>) -> Result<(), ArtifactError> {
    std::fs::write(path, artifact.to_bytes()?)?;
    Ok(())
}

pub fn load_artifact(path: impl AsRef<Path>) -> Result<PipelineArtifact, ArtifactError> {
    PipelineArtifact::from_bytes(&std::fs::read(path)?)
}
