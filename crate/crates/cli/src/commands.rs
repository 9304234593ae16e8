use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mailsift::artifact::{self, PipelineArtifact, TrainingMetadata};
use mailsift::classifiers::{RfParams, SvmParams};
use mailsift::corpus::{self, synthetic, CorpusSchema};
use mailsift::eval::{self, metrics, render_table, ConfusionMatrix, Metrics, ReportRow, CSV_HEADER};
use mailsift::explain::{self, ExplainConfig};
use mailsift::pipeline::{self, MnbInput, ModelKind, TrainConfig, VectorizerKind};
use mailsift::vectorize::Word2VecParams;
use mailsift::{Corpus, Label, PrepConfig};
use serde::Serialize;

use crate::error::CliError;
use crate::service::{ExplainResponse, PredictResponse};

#[derive(Debug, Parser)]
#[command(name = "mailsift", version, about = "Spam and phishing email classifier")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a pipeline on a corpus manifest and write an artifact.
    Train(TrainArgs),
    /// Re-evaluate an artifact on the held-out split of a manifest.
    Evaluate(EvaluateArgs),
    /// Classify one email.
    Predict(PredictArgs),
    /// Explain the classification of one email.
    Explain(ExplainArgs),
    /// Serve the JSON API.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CorpusArgs {
    /// Manifest file: one `<csv path> <schema>` per line.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Append this many synthetic template emails per class.
    #[arg(long)]
    pub synthetic: Option<usize>,
    /// Seed of the synthetic generator.
    #[arg(long)]
    pub synthetic_seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct SplitArgs {
    /// Fraction of the corpus held out for testing.
    #[arg(long)]
    pub test_ratio: Option<f64>,
    /// Seed for the split shuffle (and, in `train`, every model RNG).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    #[arg(long, default_value = "tfidf")]
    pub vectorizer: VectorizerKind,
    #[arg(long, default_value = "svm")]
    pub model: ModelKind,
    /// Output artifact path.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Stop-word file replacing the shipped English list (one word per line).
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Append the report row to this CSV file.
    #[arg(long)]
    pub report_csv: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,

    #[arg(long, default_value_t = 1.0)]
    pub svm_c: f64,
    #[arg(long, default_value_t = 20)]
    pub svm_epochs: usize,
    #[arg(long, default_value_t = 1.0)]
    pub mnb_alpha: f64,
    /// What MNB consumes from the TF-IDF vocabulary: `tfidf` weights or raw `counts`.
    #[arg(long, default_value = "tfidf")]
    pub mnb_input: MnbInput,
    #[arg(long, default_value_t = 100)]
    pub rf_trees: usize,
    #[arg(long)]
    pub rf_max_depth: Option<usize>,
    /// Candidate features per split; defaults to floor(sqrt(dim)).
    #[arg(long)]
    pub rf_max_features: Option<usize>,
    /// TF-IDF vocabulary cap for the forest (0 disables it).
    #[arg(long, default_value_t = 20_000)]
    pub rf_feature_cap: usize,
    #[arg(long, default_value_t = 100)]
    pub w2v_dim: usize,
    #[arg(long, default_value_t = 5)]
    pub w2v_window: usize,
    #[arg(long, default_value_t = 5)]
    pub w2v_epochs: usize,
    #[arg(long, default_value_t = 5)]
    pub w2v_negative: usize,
    #[arg(long, default_value_t = 2)]
    pub w2v_min_count: usize,
    /// L2-normalize TF-IDF rows.
    #[arg(long)]
    pub tfidf_normalize: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub artifact: PathBuf,
    /// Manifest file: one `<csv path> <schema>` per line.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Synthetic emails per class; defaults to what the artifact was trained with.
    #[arg(long)]
    pub synthetic: Option<usize>,
    #[arg(long)]
    pub synthetic_seed: Option<u64>,
    #[command(flatten)]
    pub split: SplitArgs,
    /// Score every record instead of only the held-out split.
    #[arg(long)]
    pub all: bool,
    #[arg(long)]
    pub report_csv: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TextArgs {
    #[arg(long)]
    pub artifact: PathBuf,
    /// Email text; use --file or stdin otherwise.
    #[arg(long, conflicts_with = "file")]
    pub text: Option<String>,
    /// Read the email from this file (`-` for stdin).
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub input: TextArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ExplainArgs {
    #[command(flatten)]
    pub input: TextArgs,
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    #[arg(long, default_value_t = 1000)]
    pub n_samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 25.0)]
    pub kernel_width: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[arg(long, env = "MAILSIFT_ARTIFACT")]
    pub artifact: PathBuf,
    #[arg(long, env = "MAILSIFT_ADDR", default_value = "127.0.0.1:8080")]
    pub addr: std::net::SocketAddr,
    /// Allow cross-origin requests from this origin (repeatable, `*` for any).
    #[arg(long = "cors-origin")]
    pub cors_origins: Vec<String>,
}

/// Rows of a loaded corpus plus how it was assembled.
pub struct LoadedCorpus {
    pub corpus: Corpus,
    pub name: String,
}

pub fn load_corpus(manifest: &Path, synthetic_per_class: usize, synthetic_seed: u64) -> Result<LoadedCorpus, CliError> {
    let datasets = corpus::load_manifest(manifest)?;
    let dropped: usize = datasets.iter().map(|d| d.dropped).sum();
    if dropped > 0 {
        eprintln!("mailsift: dropped {dropped} rows with invalid labels");
    }
    let mut input = corpus::into_merge_input(datasets);
    if synthetic_per_class > 0 {
        input.push((
            synthetic::generate(synthetic_per_class, synthetic_per_class, synthetic_seed),
            CorpusSchema::SubjectBody,
        ));
    }
    let corpus = corpus::merge_corpora(&input)?;
    if corpus.dropped_blank() > 0 {
        eprintln!("mailsift: dropped {} rows with blank text", corpus.dropped_blank());
    }
    let name = manifest
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".into());
    Ok(LoadedCorpus { corpus, name })
}

fn subset(corpus: &Corpus, idx: &[usize]) -> (Vec<String>, Vec<Label>) {
    let recs = corpus.records();
    (
        idx.iter().map(|&i| recs[i].text.clone()).collect(),
        idx.iter().map(|&i| recs[i].label).collect(),
    )
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub row: ReportRow,
    pub confusion: ConfusionMatrix,
    pub n_train: usize,
    pub n_test: usize,
}

impl Report {
    pub fn render(&self, json: bool) -> String {
        if json {
            return serde_json::to_string_pretty(self).expect("report serializes");
        }
        let c = &self.confusion;
        format!(
            "{}\n{CSV_HEADER}\n{}\n\ntrain {} / test {}; tp {} fp {} tn {} fn {}\n",
            render_table(std::slice::from_ref(&self.row)),
            self.row.to_csv(),
            self.n_train,
            self.n_test,
            c.tp,
            c.fp,
            c.tn,
            c.fn_
        )
    }
}

fn append_csv(path: &Path, row: &ReportRow) -> Result<(), CliError> {
    use std::io::Write;
    let fresh = !path.exists();
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))?;
    let mut out = String::new();
    if fresh {
        out.push_str(CSV_HEADER);
        out.push('\n');
    }
    out.push_str(&row.to_csv());
    out.push('\n');
    f.write_all(out.as_bytes())
        .map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
}

fn check_ratio(r: f64) -> Result<f64, CliError> {
    if r > 0.0 && r < 1.0 {
        Ok(r)
    } else {
        Err(CliError::Usage(format!("--test-ratio must lie strictly between 0 and 1, got {r}")))
    }
}

pub fn train_config(args: &TrainArgs, seed: u64) -> TrainConfig {
    TrainConfig {
        vectorizer: args.vectorizer,
        model: args.model,
        svm: SvmParams {
            c: args.svm_c,
            epochs: args.svm_epochs,
            seed,
        },
        mnb_alpha: args.mnb_alpha,
        mnb_input: args.mnb_input,
        rf: RfParams {
            n_trees: args.rf_trees,
            max_features: args.rf_max_features,
            max_depth: args.rf_max_depth,
            seed,
            ..RfParams::default()
        },
        rf_feature_cap: (args.rf_feature_cap > 0).then_some(args.rf_feature_cap),
        word2vec: Word2VecParams {
            dim: args.w2v_dim,
            window: args.w2v_window,
            epochs: args.w2v_epochs,
            negative: args.w2v_negative,
            min_count: args.w2v_min_count,
            seed,
            ..Word2VecParams::default()
        },
        tfidf_normalize: args.tfidf_normalize,
    }
}

fn now_unix() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Trains, evaluates on the held-out split and writes the artifact.
pub fn train(args: &TrainArgs) -> Result<String, CliError> {
    let ratio = check_ratio(args.split.test_ratio.unwrap_or(0.2))?;
    let seed = args.split.seed.unwrap_or(42);
    let n_synth = args.corpus.synthetic.unwrap_or(0);
    let synth_seed = args.corpus.synthetic_seed.unwrap_or(seed);
    let prep = match &args.stopwords {
        Some(p) => PrepConfig::from_stopword_file(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?,
        None => PrepConfig::default(),
    };
    let loaded = load_corpus(&args.corpus.manifest, n_synth, synth_seed)?;
    let split = eval::split(loaded.corpus.len(), ratio, seed).map_err(mailsift::Error::from)?;
    let (train_x, train_y) = subset(&loaded.corpus, &split.train);
    let (test_x, test_y) = subset(&loaded.corpus, &split.test);

    let config = train_config(args, seed);
    let pipe = pipeline::train(&train_x, &train_y, prep, &config)?;
    let cm = pipe.evaluate(&test_x, &test_y)?;
    let m = metrics(&cm);

    let metadata = TrainingMetadata {
        corpus_fingerprint: loaded.corpus.fingerprint(),
        dataset: loaded.name.clone(),
        split_seed: seed,
        test_ratio: ratio,
        synthetic_per_class: n_synth,
        synthetic_seed: synth_seed,
        metrics: Some(m),
        created_at: now_unix(),
    };
    let art = PipelineArtifact::new(pipe, metadata);
    artifact::save_artifact(&art, &args.out)?;

    let report = Report {
        row: row(&loaded.name, &config.vectorizer.to_string(), &config.model.to_string(), m),
        confusion: cm,
        n_train: split.train.len(),
        n_test: split.test.len(),
    };
    if let Some(p) = &args.report_csv {
        append_csv(p, &report.row)?;
    }
    Ok(report.render(args.json))
}

fn row(dataset: &str, vectorizer: &str, model: &str, metrics: Metrics) -> ReportRow {
    ReportRow {
        dataset: dataset.into(),
        vectorizer: vectorizer.into(),
        model: model.into(),
        metrics,
    }
}

pub fn evaluate(args: &EvaluateArgs) -> Result<String, CliError> {
    let art = artifact::load_artifact(&args.artifact)?;
    let meta = &art.metadata;
    let ratio = check_ratio(args.split.test_ratio.unwrap_or(meta.test_ratio))?;
    let seed = args.split.seed.unwrap_or(meta.split_seed);
    let n_synth = args.synthetic.unwrap_or(meta.synthetic_per_class);
    let synth_seed = args.synthetic_seed.unwrap_or(meta.synthetic_seed);
    let loaded = load_corpus(&args.manifest, n_synth, synth_seed)?;
    if !meta.corpus_fingerprint.is_empty() && loaded.corpus.fingerprint() != meta.corpus_fingerprint {
        eprintln!("mailsift: warning: corpus differs from the one this artifact was trained on");
    }
    let idx: Vec<usize> = if args.all {
        (0..loaded.corpus.len()).collect()
    } else {
        eval::split(loaded.corpus.len(), ratio, seed).map_err(mailsift::Error::from)?.test
    };
    let (x, y) = subset(&loaded.corpus, &idx);
    let cm = art.pipeline.evaluate(&x, &y)?;
    let m = metrics(&cm);
    let report = Report {
        row: row(&loaded.name, art.pipeline.vectorizer().tag(), art.pipeline.classifier().tag(), m),
        confusion: cm,
        n_train: loaded.corpus.len() - idx.len(),
        n_test: idx.len(),
    };
    if let Some(p) = &args.report_csv {
        append_csv(p, &report.row)?;
    }
    Ok(report.render(args.json))
}

fn read_text(input: &TextArgs) -> Result<String, CliError> {
    let text = match (&input.text, &input.file) {
        (Some(t), _) => t.clone(),
        (None, Some(p)) if p.as_os_str() == "-" => read_stdin()?,
        (None, Some(p)) => std::fs::read_to_string(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?,
        (None, None) => read_stdin()?,
    };
    if text.trim().is_empty() {
        return Err(CliError::Usage("email text is empty".into()));
    }
    Ok(text)
}

fn read_stdin() -> Result<String, CliError> {
    let mut s = String::new();
    std::io::stdin()
        .read_to_string(&mut s)
        .map_err(|e| CliError::Data(format!("stdin: {e}")))?;
    Ok(s)
}

pub fn predict(args: &PredictArgs) -> Result<String, CliError> {
    let art = artifact::load_artifact(&args.input.artifact)?;
    let text = read_text(&args.input)?;
    let tokens = art.pipeline.tokenize(&text);
    if tokens.is_empty() {
        return Err(CliError::Usage("email text has no analyzable tokens".into()));
    }
    let p = art.pipeline.predict_tokens(&tokens)?;
    let resp = PredictResponse::new(&p, art.model_tag());
    if args.input.json {
        return Ok(serde_json::to_string(&resp).expect("response serializes") + "\n");
    }
    Ok(format!(
        "{} (spam score {:.4}, model {})\n",
        resp.label,
        resp.score,
        art.pipeline.describe()
    ))
}

pub fn explain(args: &ExplainArgs) -> Result<String, CliError> {
    let art = artifact::load_artifact(&args.input.artifact)?;
    let text = read_text(&args.input)?;
    let cfg = ExplainConfig {
        n_samples: args.n_samples,
        kernel_width: args.kernel_width,
        top_k: args.top_k,
        seed: args.seed,
        ..ExplainConfig::default()
    };
    let e = explain::explain(&art.pipeline, &text, &cfg)?;
    let resp = ExplainResponse::from(&e);
    if args.input.json {
        return Ok(serde_json::to_string(&resp).expect("response serializes") + "\n");
    }
    let verdict = if e.class_probs.spam >= 0.5 { "spam" } else { "ham" };
    let mut out = format!(
        "{verdict}: spam {:.4}, not spam {:.4} (surrogate fit {:.3})\n",
        e.class_probs.spam, e.class_probs.ham, e.surrogate_fit
    );
    let width = resp.tokens.iter().map(|t| t.token.len()).max().unwrap_or(0);
    for t in &resp.tokens {
        let side = if t.weight >= 0.0 { "spam" } else { "ham" };
        out.push_str(&format!(
            "  {:<width$}  {:+.4}  -> {side}  (token {})\n",
            t.token, t.weight, t.position
        ));
    }
    Ok(out)
}
