//! The `aztext` command line: clean, stats, train, evaluate, predict, serve.
//!
//! Exit codes: 0 success, 2 usage or I/O failure, 3 data-quality failure
//! (e.g. a training set with a single class).

pub mod config;

use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use aztext::classify::{Activation, ClassifyError, ModelKind};
use aztext::corpus::{
    corpus_stats, load_csv, parse_rules, run_cleaning, save_csv, sentence_histogram, CategoryMap, CleanOptions,
    CorpusError, MergePolicy, StatsReport, DEFAULT_RULES,
};
use aztext::evaluate::{split, EvalError};
use aztext::text::SentenceMode;
use aztext::train::{evaluate_model, train_model_with_classes, TrainError};
use aztext::vectorize::{VectorizeError, VectorizerKind};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use config::{Hyperparameters, PipelineSettings, RunConfig, SolverKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

/// A failure with the exit code it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, message: message.into() }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError { code: EXIT_DATA, message: message.into() }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        let code = match &e {
            TrainError::InvalidAlpha(_) | TrainError::Classify(ClassifyError::InvalidHyperparameter(_)) => EXIT_USAGE,
            TrainError::Vectorize(VectorizeError::InvalidMinDf) => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        CliError { code, message: e.to_string() }
    }
}

#[derive(Debug, Parser)]
#[command(name = "aztext", version, about = "Clean, vectorize and classify news corpora")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Deduplicate, filter, scrub and relabel a CSV corpus.
    Clean(CleanArgs),
    /// Sentence and character statistics plus a sentence histogram, as JSON.
    Stats(StatsArgs),
    /// Split, train, save the model, and print held-out metrics as JSON.
    Train(TrainArgs),
    /// Score a saved model against a labeled CSV corpus.
    Evaluate(EvaluateArgs),
    /// Classify one document per input line.
    Predict(PredictArgs),
    /// Serve a saved model over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON RunConfig file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SentenceArgs {
    /// Sentence counting: dot-count (number of '.') or terminator-runs.
    #[arg(long, value_parser = parse_sentence_mode)]
    pub sentence_mode: Option<SentenceMode>,
}

fn parse_sentence_mode(s: &str) -> Result<SentenceMode, String> {
    match s {
        "dot-count" | "dot_count" | "dots" => Ok(SentenceMode::DotCount),
        "terminator-runs" | "terminator_runs" | "terminators" => Ok(SentenceMode::TerminatorRuns),
        other => Err(format!("unknown sentence mode {other:?}")),
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CleanArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Cleaned CSV destination.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Also write the JSON report here (it is always printed).
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub min_chars: Option<usize>,
    #[arg(long)]
    pub max_chars: Option<usize>,
    #[arg(long)]
    pub min_sentences: Option<usize>,
    #[arg(long)]
    pub max_sentences: Option<usize>,
    #[command(flatten)]
    pub sentences: SentenceArgs,
    /// Scrub rule file (PATTERN<TAB>REPLACEMENT per line).
    #[arg(long)]
    pub rules: Option<PathBuf>,
    /// Skip regex scrubbing.
    #[arg(long)]
    pub no_scrub: bool,
    /// Category mapping file (old<TAB>new per line).
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    /// Fail on categories missing from the mapping instead of keeping them.
    #[arg(long)]
    pub strict_mapping: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Histogram buckets 0..N-1 are exact; bucket N pools everything >= N.
    #[arg(long)]
    pub max_bucket: Option<usize>,
    #[command(flatten)]
    pub sentences: SentenceArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PipelineArgs {
    /// Stop-word file, one word per line.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[arg(long)]
    pub no_stopwords: bool,
    #[arg(long)]
    pub stemming: bool,
    /// Suffix table for stemming, one suffix per line.
    #[arg(long)]
    pub suffixes: Option<PathBuf>,
    #[arg(long)]
    pub keep_digits: bool,
    #[arg(long)]
    pub min_token_len: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Where to write the trained model.
    #[arg(long = "model-out", short = 'm')]
    pub model_path: Option<PathBuf>,
    #[arg(long, value_parser = parse_model_kind)]
    pub model: Option<ModelKind>,
    #[arg(long, value_parser = parse_vectorizer)]
    pub vectorizer: Option<VectorizerKind>,
    #[arg(long)]
    pub min_df: Option<u64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Hidden layer sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    #[arg(long, value_parser = parse_activation)]
    pub activation: Option<Activation>,
    #[arg(long, value_enum)]
    pub solver: Option<SolverKind>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub l2: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    /// Shuffle-split without preserving class proportions.
    #[arg(long)]
    pub no_stratify: bool,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

fn parse_model_kind(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_vectorizer(s: &str) -> Result<VectorizerKind, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_activation(s: &str) -> Result<Activation, String> {
    match s {
        "tanh" => Ok(Activation::Tanh),
        "logistic" | "sigmoid" => Ok(Activation::Logistic),
        other => Err(format!("unknown activation {other:?}")),
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, short)]
    pub model: Option<PathBuf>,
    #[arg(long, short)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, short)]
    pub model: Option<PathBuf>,
    /// Text file with one document per line; standard input when omitted.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, short)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub bind: Option<String>,
    #[arg(long)]
    pub port: Option<u16>,
    /// Largest accepted request body in bytes.
    #[arg(long)]
    pub body_limit: Option<usize>,
}

fn base_config(common: &CommonArgs, subcommand: &str) -> Result<RunConfig, CliError> {
    let config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(declared) = &config.subcommand {
        if declared != subcommand {
            return Err(CliError::usage(format!("config is for `{declared}`, not `{subcommand}`")));
        }
    }
    Ok(config)
}

macro_rules! overlay {
    ($($target:expr => $flag:expr),* $(,)?) => {
        $(if let Some(v) = $flag.clone() { $target = v.into(); })*
    };
}

impl Command {
    /// Merges config file and flags into the effective configuration.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        match self {
            Command::Clean(a) => {
                let mut c = base_config(&a.common, "clean")?;
                overlay!(
                    c.input => a.input.clone().map(Some), c.output => a.output.clone().map(Some),
                    c.report => a.report.clone().map(Some), c.rules => a.rules.clone().map(Some),
                    c.mapping => a.mapping.clone().map(Some),
                    c.thresholds.min_chars => a.min_chars, c.thresholds.max_chars => a.max_chars,
                    c.thresholds.min_sentences => a.min_sentences, c.thresholds.max_sentences => a.max_sentences,
                    c.sentence_mode => a.sentences.sentence_mode,
                );
                if a.no_scrub {
                    c.scrub = false;
                }
                if a.strict_mapping {
                    c.merge_policy = MergePolicy::Strict;
                }
                Ok(c)
            }
            Command::Stats(a) => {
                let mut c = base_config(&a.common, "stats")?;
                overlay!(c.input => a.input.clone().map(Some), c.max_bucket => a.max_bucket, c.sentence_mode => a.sentences.sentence_mode);
                Ok(c)
            }
            Command::Train(a) => {
                let mut c = base_config(&a.common, "train")?;
                let h = &mut c.hyperparameters;
                overlay!(
                    h.min_df => a.min_df, h.alpha => a.alpha, h.lambda => a.lambda, h.epochs => a.epochs,
                    h.hidden => a.hidden, h.activation => a.activation, h.solver => a.solver,
                    h.learning_rate => a.learning_rate, h.batch_size => a.batch_size, h.max_iters => a.max_iters,
                    h.tol => a.tol, h.l2 => a.l2,
                );
                overlay!(
                    c.input => a.input.clone().map(Some), c.model_path => a.model_path.clone().map(Some),
                    c.model => a.model, c.vectorizer => a.vectorizer.map(Some), c.seed => a.seed.map(Some),
                    c.test_fraction => a.test_fraction,
                );
                if a.no_stratify {
                    c.stratified = false;
                }
                let p = &mut c.pipeline;
                overlay!(p.stopwords => a.pipeline.stopwords.clone().map(Some), p.suffixes => a.pipeline.suffixes.clone().map(Some), p.min_token_len => a.pipeline.min_token_len);
                if a.pipeline.no_stopwords {
                    p.remove_stopwords = false;
                }
                if a.pipeline.stemming {
                    p.stemming = true;
                }
                if a.pipeline.keep_digits {
                    p.keep_digits = true;
                }
                Ok(c)
            }
            Command::Evaluate(a) => {
                let mut c = base_config(&a.common, "evaluate")?;
                overlay!(c.model_path => a.model.clone().map(Some), c.input => a.input.clone().map(Some));
                Ok(c)
            }
            Command::Predict(a) => {
                let mut c = base_config(&a.common, "predict")?;
                overlay!(c.model_path => a.model.clone().map(Some), c.input => a.input.clone().map(Some));
                Ok(c)
            }
            Command::Serve(a) => {
                let mut c = base_config(&a.common, "serve")?;
                overlay!(c.model_path => a.model.clone().map(Some), c.bind => a.bind, c.port => a.port, c.body_limit => a.body_limit);
                Ok(c)
            }
        }
    }
}

fn required<'a>(path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path, CliError> {
    path.as_deref().ok_or_else(|| CliError::usage(format!("missing {what} (flag or config)")))
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::usage(e.to_string()))?;
    writeln!(out, "{text}").map_err(io_error)
}

fn io_error(e: io::Error) -> CliError {
    CliError::usage(format!("I/O error: {e}"))
}

fn load_model(config: &RunConfig) -> Result<aztext::TrainedModel, CliError> {
    let path = required(&config.model_path, "model path")?;
    aztext::load_model(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

pub fn run_clean(config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let input = required(&config.input, "input CSV")?;
    let output = required(&config.output, "output CSV")?;
    config.thresholds.validate()?;
    let rules = match (config.scrub, &config.rules) {
        (false, _) => Vec::new(),
        (true, Some(path)) => parse_rules(&config::read_text(path)?)?,
        (true, None) => parse_rules(DEFAULT_RULES)?,
    };
    let mapping = match &config.mapping {
        Some(path) => Some((CategoryMap::parse(&config::read_text(path)?)?, config.merge_policy)),
        None => None,
    };
    let corpus = load_csv(input)?;
    let options = CleanOptions { thresholds: config.thresholds, rules, mapping };
    let mode = config.sentence_mode;
    let (cleaned, report) = run_cleaning(corpus, &options, |t| mode.count(t)).map_err(|e| match e {
        CorpusError::UnknownCategory(_) => CliError::data(e.to_string()),
        other => other.into(),
    })?;
    save_csv(&cleaned, output)?;
    if let Some(path) = &config.report {
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        std::fs::write(path, text + "\n").map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    }
    print_json(out, &report)
}

#[derive(Serialize)]
struct StatsOutput {
    #[serde(flatten)]
    stats: StatsReport,
    histogram: aztext::corpus::SentenceHistogram,
}

pub fn run_stats(config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let input = required(&config.input, "input CSV")?;
    if config.max_bucket == 0 {
        return Err(CliError::usage("max_bucket must be >= 1"));
    }
    let corpus = load_csv(input)?;
    let mode = config.sentence_mode;
    let stats = corpus_stats(&corpus, |t| mode.count(t))?;
    let histogram = sentence_histogram(&corpus, |t| mode.count(t), config.max_bucket);
    print_json(out, &StatsOutput { stats, histogram })
}

pub fn run_train(config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    config.validate_training()?;
    let options = config.train_options()?;
    let input = required(&config.input, "input CSV")?;
    let model_path = required(&config.model_path, "model output path (--model-out)")?;
    let corpus = load_csv(input)?;
    let class_names: Vec<String> = corpus.labels().iter().cloned().collect();
    let (train, test) = split(&corpus, config.test_fraction, config.resolved_seed()?, config.stratified).map_err(|e| match e {
        EvalError::InvalidFraction(_) => CliError::usage(e.to_string()),
        other => CliError::data(other.to_string()),
    })?;
    let model = train_model_with_classes(&train, &class_names, &options)?;
    aztext::save_model(&model, model_path).map_err(|e| CliError::usage(format!("{}: {e}", model_path.display())))?;
    let report = evaluate_model(&model, &test)?;
    print_json(out, &report)
}

pub fn run_evaluate(config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let model = load_model(config)?;
    let corpus = load_csv(required(&config.input, "input CSV")?)?;
    let report = evaluate_model(&model, &corpus)?;
    print_json(out, &report)
}

pub fn run_predict(config: &RunConfig, stdin: &mut dyn BufRead, out: &mut dyn Write) -> Result<(), CliError> {
    let model = load_model(config)?;
    let mut file_reader;
    let reader: &mut dyn BufRead = match &config.input {
        Some(path) => {
            file_reader = BufReader::new(File::open(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?);
            &mut file_reader
        }
        None => stdin,
    };
    for line in reader.lines() {
        let line = line.map_err(io_error)?;
        let text = line.strip_suffix('\r').unwrap_or(&line);
        match model.predict_text(text) {
            Ok(p) => writeln!(out, "{}\t{}", p.label, p.top_score()),
            Err(_) => writeln!(out, "ERROR:empty_input"),
        }
        .map_err(io_error)?;
    }
    Ok(())
}

pub fn run_serve(config: &RunConfig) -> Result<(), CliError> {
    let model_path = required(&config.model_path, "model path")?;
    let serve_config =
        aztext_serve::ServeConfig { bind: config.bind.clone(), port: config.port, body_limit: config.body_limit };
    let runtime = tokio::runtime::Runtime::new().map_err(io_error)?;
    runtime.block_on(aztext_serve::run(model_path, &serve_config)).map_err(|e| CliError::usage(e.to_string()))
}

/// Runs a parsed command. Machine-readable output goes to `out`; the
/// returned error carries the diagnostic and exit code.
pub fn execute(command: &Command, stdin: &mut dyn BufRead, out: &mut dyn Write) -> Result<(), CliError> {
    let config = command.resolve()?;
    match command {
        Command::Clean(_) => run_clean(&config, out),
        Command::Stats(_) => run_stats(&config, out),
        Command::Train(_) => run_train(&config, out),
        Command::Evaluate(_) => run_evaluate(&config, out),
        Command::Predict(_) => run_predict(&config, stdin, out),
        Command::Serve(_) => run_serve(&config),
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with<I, T>(args: I, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli.command, stdin, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "aztext: {e}");
            e.code
        }
    }
}
