//! `RunConfig`: every tunable of every subcommand, loadable from JSON and
//! overridable by flags.

use std::fs;
use std::path::{Path, PathBuf};

use aztext::classify::{Activation, MlpParams, ModelKind, Solver, SvmParams};
use aztext::corpus::{CleanThresholds, MergePolicy};
use aztext::text::{parse_word_list, PipelineConfig, SentenceMode, DEFAULT_STOPWORDS, DEFAULT_SUFFIXES};
use aztext::train::{ModelSpec, TrainOptions};
use aztext::vectorize::VectorizerKind;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SEED_ENV: &str = "AZTEXT_SEED";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[default]
    Lbfgs,
    Sgd,
}

/// Text analysis settings. Word lists are given as file paths; `None` means
/// the shipped lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSettings {
    pub stopwords: Option<PathBuf>,
    pub remove_stopwords: bool,
    pub stemming: bool,
    pub suffixes: Option<PathBuf>,
    pub keep_digits: bool,
    pub min_token_len: usize,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        PipelineSettings {
            stopwords: None,
            remove_stopwords: true,
            stemming: false,
            suffixes: None,
            keep_digits: false,
            min_token_len: 1,
        }
    }
}

impl PipelineSettings {
    pub fn build(&self) -> Result<PipelineConfig, CliError> {
        if self.min_token_len == 0 {
            return Err(CliError::usage("min_token_len must be >= 1"));
        }
        let stopwords = match (&self.stopwords, self.remove_stopwords) {
            (_, false) => Vec::new(),
            (Some(path), true) => parse_word_list(&read_text(path)?),
            (None, true) => parse_word_list(DEFAULT_STOPWORDS),
        };
        let suffixes = match &self.suffixes {
            Some(path) => parse_word_list(&read_text(path)?),
            None => parse_word_list(DEFAULT_SUFFIXES),
        };
        let mut config = PipelineConfig::bare().with_stopwords(stopwords).with_suffixes(suffixes);
        config.stemming = self.stemming;
        config.keep_digits = self.keep_digits;
        config.min_token_len = self.min_token_len;
        Ok(config)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparameters {
    /// NB additive smoothing.
    pub alpha: f64,
    /// SVM regularization.
    pub lambda: f64,
    /// SVM passes over the data.
    pub epochs: usize,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub solver: SolverKind,
    pub lbfgs_memory: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub l2: f64,
    pub min_df: u64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        let mlp = MlpParams::default();
        let svm = SvmParams::default();
        Hyperparameters {
            alpha: 1.0,
            lambda: svm.lambda,
            epochs: svm.epochs,
            hidden: mlp.hidden,
            activation: mlp.activation,
            solver: SolverKind::Lbfgs,
            lbfgs_memory: 10,
            learning_rate: 0.1,
            batch_size: 32,
            max_iters: mlp.max_iters,
            tol: mlp.tol,
            l2: mlp.l2,
            min_df: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Subcommand this file is meant for; checked when present.
    pub subcommand: Option<String>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    /// Where `clean` also writes its JSON report.
    pub report: Option<PathBuf>,
    /// Model file written by `train`, read by `evaluate`, `predict`, `serve`.
    pub model_path: Option<PathBuf>,
    pub thresholds: CleanThresholds,
    pub sentence_mode: SentenceMode,
    pub scrub: bool,
    /// Scrub rule file; `None` means the shipped rules.
    pub rules: Option<PathBuf>,
    pub mapping: Option<PathBuf>,
    pub merge_policy: MergePolicy,
    pub pipeline: PipelineSettings,
    /// `None` picks count for NB and TF-IDF otherwise.
    pub vectorizer: Option<VectorizerKind>,
    pub model: ModelKind,
    pub hyperparameters: Hyperparameters,
    /// `None` falls back to `AZTEXT_SEED`, then 0.
    pub seed: Option<u64>,
    pub test_fraction: f64,
    pub stratified: bool,
    pub max_bucket: usize,
    pub bind: String,
    pub port: u16,
    pub body_limit: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            subcommand: None,
            input: None,
            output: None,
            report: None,
            model_path: None,
            thresholds: CleanThresholds::default(),
            sentence_mode: SentenceMode::default(),
            scrub: true,
            rules: None,
            mapping: None,
            merge_policy: MergePolicy::default(),
            pipeline: PipelineSettings::default(),
            vectorizer: None,
            model: ModelKind::Nb,
            hyperparameters: Hyperparameters::default(),
            seed: None,
            test_fraction: 0.1,
            stratified: true,
            max_bucket: 50,
            bind: "127.0.0.1".into(),
            port: 8080,
            body_limit: aztext_serve::DEFAULT_BODY_LIMIT,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::usage(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::from_json(&read_text(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Explicit seed, else `AZTEXT_SEED`, else 0.
    pub fn resolved_seed(&self) -> Result<u64, CliError> {
        if let Some(seed) = self.seed {
            return Ok(seed);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| CliError::usage(format!("{SEED_ENV}={v:?} is not an integer"))),
            Err(_) => Ok(0),
        }
    }

    pub fn model_spec(&self) -> Result<ModelSpec, CliError> {
        let h = &self.hyperparameters;
        let seed = self.resolved_seed()?;
        Ok(match self.model {
            ModelKind::Nb => ModelSpec::Nb { alpha: h.alpha },
            ModelKind::Svm => ModelSpec::Svm(SvmParams { lambda: h.lambda, epochs: h.epochs, seed }),
            ModelKind::Mlp => ModelSpec::Mlp(MlpParams {
                hidden: h.hidden.clone(),
                activation: h.activation,
                solver: match h.solver {
                    SolverKind::Lbfgs => Solver::Lbfgs { memory: h.lbfgs_memory },
                    SolverKind::Sgd => Solver::Sgd { learning_rate: h.learning_rate, batch_size: h.batch_size },
                },
                seed,
                max_iters: h.max_iters,
                tol: h.tol,
                l2: h.l2,
            }),
        })
    }

    /// Hyperparameter checks that do not need data, so bad flags fail before
    /// any file is read.
    pub fn validate_training(&self) -> Result<(), CliError> {
        let h = &self.hyperparameters;
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(CliError::usage(format!("test_fraction must be in (0, 1), got {}", self.test_fraction)));
        }
        if h.min_df == 0 {
            return Err(CliError::usage("min_df must be >= 1"));
        }
        match self.model {
            ModelKind::Nb if !(h.alpha > 0.0 && h.alpha.is_finite()) => {
                Err(CliError::usage(format!("alpha must be > 0, got {}", h.alpha)))
            }
            ModelKind::Svm if !(h.lambda > 0.0 && h.lambda.is_finite()) || h.epochs == 0 => {
                Err(CliError::usage("lambda must be > 0 and epochs >= 1"))
            }
            ModelKind::Mlp if h.hidden.is_empty() || h.hidden.contains(&0) || h.max_iters == 0 => {
                Err(CliError::usage("hidden sizes must be non-empty and positive, max_iters >= 1"))
            }
            _ => Ok(()),
        }
    }

    pub fn train_options(&self) -> Result<TrainOptions, CliError> {
        Ok(TrainOptions {
            model: self.model_spec()?,
            vectorizer: self.vectorizer,
            min_df: self.hyperparameters.min_df,
            pipeline: self.pipeline.build()?,
        })
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}
