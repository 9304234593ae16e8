//! Dataset ingestion and harmonization into a single labeled corpus.
//!
//! Two CSV layouts are understood: subject/body/label files and full-header
//! files (sender, receiver, date, subject, body, label, urls). Every record is
//! reduced to one `text_combined` string. Receiver and URL columns are read
//! but never enter the combined text.

use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub mod synthetic;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("io error reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed csv: {0}")]
    Csv(String),
    #[error("dataset contains no valid rows")]
    EmptyDataset,
    #[error("unknown schema tag `{0}` (expected subject_body or full_header)")]
    UnknownSchema(String),
    #[error("manifest line {line}: {reason}")]
    Manifest { line: usize, reason: String },
    #[error("class counts ({spam}, {ham}) disagree with {actual} records")]
    CountMismatch { spam: usize, ham: usize, actual: usize },
}

/// Binary class label. Spam is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Label {
    Ham,
    Spam,
}

impl Label {
    pub fn as_u8(self) -> u8 {
        match self {
            Label::Ham => 0,
            Label::Spam => 1,
        }
    }

    pub fn is_spam(self) -> bool {
        self == Label::Spam
    }

    /// +1 for spam, -1 for ham.
    pub fn sign(self) -> f64 {
        match self {
            Label::Ham => -1.0,
            Label::Spam => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Ham => "ham",
            Label::Spam => "spam",
        }
    }
}

impl From<bool> for Label {
    fn from(spam: bool) -> Self {
        if spam {
            Label::Spam
        } else {
            Label::Ham
        }
    }
}

impl From<Label> for u8 {
    fn from(l: Label) -> u8 {
        l.as_u8()
    }
}

impl TryFrom<u8> for Label {
    type Error = u8;

    fn try_from(v: u8) -> Result<Self, u8> {
        match v {
            0 => Ok(Label::Ham),
            1 => Ok(Label::Spam),
            other => Err(other),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses a label cell. Accepts `0`/`1` with surrounding whitespace.
pub fn parse_label(cell: &str) -> Option<Label> {
    match cell.trim() {
        "0" => Some(Label::Ham),
        "1" => Some(Label::Spam),
        _ => None,
    }
}

/// Column layout of an input file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusSchema {
    /// `subject, body, label`
    SubjectBody,
    /// `sender, receiver, date, subject, body, label, urls`
    FullHeader,
}

impl CorpusSchema {
    pub fn required_columns(self) -> &'static [&'static str] {
        match self {
            CorpusSchema::SubjectBody => &["subject", "body", "label"],
            CorpusSchema::FullHeader => &["sender", "receiver", "date", "subject", "body", "label", "urls"],
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            CorpusSchema::SubjectBody => "subject_body",
            CorpusSchema::FullHeader => "full_header",
        }
    }
}

impl FromStr for CorpusSchema {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "subject_body" | "subjectbody" => Ok(CorpusSchema::SubjectBody),
            "full_header" | "fullheader" => Ok(CorpusSchema::FullHeader),
            _ => Err(CorpusError::UnknownSchema(s.to_string())),
        }
    }
}

impl fmt::Display for CorpusSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// One email as read from a dataset file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmailRecord {
    pub sender: Option<String>,
    pub receiver: Option<String>,
    /// Kept verbatim; dates are never parsed.
    pub date: Option<String>,
    pub subject: Option<String>,
    pub body: String,
    pub url_flag: Option<bool>,
    pub label: Label,
    pub source: String,
}

impl EmailRecord {
    /// A subject/body record with no header fields.
    pub fn simple(subject: Option<&str>, body: &str, label: Label, source: &str) -> Self {
        Self {
            sender: None,
            receiver: None,
            date: None,
            subject: subject.map(str::to_string),
            body: body.to_string(),
            url_flag: None,
            label,
            source: source.to_string(),
        }
    }
}

/// Records read from one file plus the number of rows rejected.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub schema: CorpusSchema,
    pub records: Vec<EmailRecord>,
    pub dropped: usize,
}

/// Reads a CSV dataset file. The source tag is the file stem.
pub fn load_dataset(path: impl AsRef<Path>, schema: CorpusSchema) -> Result<LoadedDataset, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let source = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    read_dataset(file, schema, &source).map_err(|e| match e {
        CorpusError::Io { source, .. } => CorpusError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

/// Reads CSV data in the given schema from any reader.
pub fn read_dataset<R: Read>(reader: R, schema: CorpusSchema, source: &str) -> Result<LoadedDataset, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
            .ok_or_else(|| CorpusError::MissingColumn(name.to_string()))
    };
    let cols: Vec<usize> = schema.required_columns().iter().map(|c| column(c)).collect::<Result<_, _>>()?;

    let mut records = Vec::new();
    let mut dropped = 0;
    for row in rdr.records() {
        let row = match row {
            Ok(r) => r,
            Err(e) if matches!(e.kind(), csv::ErrorKind::Io(_)) => return Err(csv_error(e)),
            Err(_) => {
                dropped += 1;
                continue;
            }
        };
        let cell = |i: usize| row.get(cols[i]);
        let opt = |i: usize| cell(i).filter(|s| !s.trim().is_empty()).map(str::to_string);
        let record = match schema {
            CorpusSchema::SubjectBody => cell(2).and_then(parse_label).map(|label| EmailRecord {
                sender: None,
                receiver: None,
                date: None,
                subject: opt(0),
                body: cell(1).unwrap_or_default().to_string(),
                url_flag: None,
                label,
                source: source.to_string(),
            }),
            CorpusSchema::FullHeader => cell(5).and_then(parse_label).map(|label| EmailRecord {
                sender: opt(0),
                receiver: opt(1),
                date: opt(2),
                subject: opt(3),
                body: cell(4).unwrap_or_default().to_string(),
                url_flag: cell(6).and_then(|u| match u.trim() {
                    "1" => Some(true),
                    "0" => Some(false),
                    _ => None,
                }),
                label,
                source: source.to_string(),
            }),
        };
        match record {
            Some(r) => records.push(r),
            None => dropped += 1,
        }
    }
    if records.is_empty() {
        return Err(CorpusError::EmptyDataset);
    }
    Ok(LoadedDataset { schema, records, dropped })
}

fn csv_error(e: csv::Error) -> CorpusError {
    if let csv::ErrorKind::Io(_) = e.kind() {
        match e.into_kind() {
            csv::ErrorKind::Io(source) => CorpusError::Io {
                path: PathBuf::new(),
                source,
            },
            _ => unreachable!(),
        }
    } else {
        CorpusError::Csv(e.to_string())
    }
}

/// Joins the text fields of a record into the single `text_combined` string.
///
/// Full-header records contribute sender, date, subject and body in that
/// order; subject/body records contribute subject and body. Fields are
/// trimmed, empty ones skipped, and the rest joined by single spaces.
pub fn combine_text(record: &EmailRecord, schema: CorpusSchema) -> String {
    let fields: Vec<Option<&str>> = match schema {
        CorpusSchema::SubjectBody => vec![record.subject.as_deref(), Some(record.body.as_str())],
        CorpusSchema::FullHeader => vec![
            record.sender.as_deref(),
            record.date.as_deref(),
            record.subject.as_deref(),
            Some(record.body.as_str()),
        ],
    };
    join_fields(fields.into_iter().flatten())
}

/// Body text only, trimmed. Used by the field-merging ablation.
pub fn body_text(record: &EmailRecord) -> String {
    record.body.trim().to_string()
}

fn join_fields<'a>(fields: impl Iterator<Item = &'a str>) -> String {
    let mut out = String::new();
    for f in fields.map(str::trim).filter(|f| !f.is_empty()) {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(f);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub text: String,
    pub label: Label,
    pub source: String,
}

/// The merged, labeled corpus. Record order is input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    records: Vec<CorpusRecord>,
    n_spam: usize,
    n_ham: usize,
    dropped_blank: usize,
}

impl Corpus {
    /// Builds a corpus from already-combined records, dropping blank texts.
    pub fn from_records(records: Vec<CorpusRecord>) -> Result<Self, CorpusError> {
        let before = records.len();
        let records: Vec<_> = records.into_iter().filter(|r| !r.text.trim().is_empty()).collect();
        let dropped_blank = before - records.len();
        if records.is_empty() {
            return Err(CorpusError::EmptyDataset);
        }
        let n_spam = records.iter().filter(|r| r.label.is_spam()).count();
        let n_ham = records.len() - n_spam;
        Ok(Self {
            records,
            n_spam,
            n_ham,
            dropped_blank,
        })
    }

    /// Rebuilds a corpus with stated class counts, checking them.
    pub fn with_counts(records: Vec<CorpusRecord>, n_spam: usize, n_ham: usize) -> Result<Self, CorpusError> {
        let corpus = Self::from_records(records)?;
        if corpus.class_counts() != (n_spam, n_ham) {
            return Err(CorpusError::CountMismatch {
                spam: n_spam,
                ham: n_ham,
                actual: corpus.len(),
            });
        }
        Ok(corpus)
    }

    pub fn records(&self) -> &[CorpusRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `(n_spam, n_ham)`
    pub fn class_counts(&self) -> (usize, usize) {
        (self.n_spam, self.n_ham)
    }

    /// Rows dropped because their combined text was blank.
    pub fn dropped_blank(&self) -> usize {
        self.dropped_blank
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.text.as_str())
    }

    pub fn labels(&self) -> Vec<Label> {
        self.records.iter().map(|r| r.label).collect()
    }

    /// SHA-256 over every (label, text) pair, hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for r in &self.records {
            h.update([r.label.as_u8()]);
            h.update((r.text.len() as u64).to_le_bytes());
            h.update(r.text.as_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Merges datasets in order, combining each record's text fields.
pub fn merge_corpora(datasets: &[(Vec<EmailRecord>, CorpusSchema)]) -> Result<Corpus, CorpusError> {
    merge_with(datasets, combine_text)
}

/// Like [`merge_corpora`] with a custom text-combination rule.
pub fn merge_with<F>(datasets: &[(Vec<EmailRecord>, CorpusSchema)], combine: F) -> Result<Corpus, CorpusError>
where
    F: Fn(&EmailRecord, CorpusSchema) -> String,
{
    let records = datasets
        .iter()
        .flat_map(|(recs, schema)| {
            recs.iter().map(|r| CorpusRecord {
                text: combine(r, *schema),
                label: r.label,
                source: r.source.clone(),
            })
        })
        .collect();
    Corpus::from_records(records)
}

/// One manifest line: a dataset path and its schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub schema: CorpusSchema,
}

/// Parses a manifest: one `<path> <schema>` per line, `#` starts a comment.
/// Relative paths are resolved against `base_dir`.
pub fn parse_manifest(text: &str, base_dir: &Path) -> Result<Vec<ManifestEntry>, CorpusError> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (path, tag) = line
            .rsplit_once(|c: char| c.is_whitespace() || c == ',')
            .ok_or_else(|| CorpusError::Manifest {
                line: i + 1,
                reason: "expected `<path> <schema>`".into(),
            })?;
        let schema = tag.parse().map_err(|_| CorpusError::Manifest {
            line: i + 1,
            reason: format!("unknown schema `{tag}`"),
        })?;
        let path = PathBuf::from(path.trim().trim_end_matches(','));
        let path = if path.is_relative() { base_dir.join(path) } else { path };
        entries.push(ManifestEntry { path, schema });
    }
    if entries.is_empty() {
        return Err(CorpusError::Manifest {
            line: 0,
            reason: "manifest lists no datasets".into(),
        });
    }
    Ok(entries)
}

/// Reads a manifest file and loads every dataset it lists.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<LoadedDataset>, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_manifest(&text, base)?
        .into_iter()
        .map(|e| load_dataset(&e.path, e.schema))
        .collect()
}

/// Turns loaded datasets into the `(records, schema)` pairs `merge_corpora` takes.
pub fn into_merge_input(datasets: Vec<LoadedDataset>) -> Vec<(Vec<EmailRecord>, CorpusSchema)> {
    datasets.into_iter().map(|d| (d.records, d.schema)).collect()
}
