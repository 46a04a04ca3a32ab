//! Cleaning, vectorization and classification of news-article corpora.
//!
//! The pipeline runs in two halves: offline, a CSV corpus is deduplicated,
//! filtered and scrubbed ([`corpus`]), tokenized ([`text`]), vectorized
//! ([`vectorize`]) and used to fit a classifier ([`classify`], [`train`]);
//! online, the saved [`classify::TrainedModel`] labels raw text.

pub mod classify;
pub mod corpus;
pub mod evaluate;
pub mod synthetic;
pub mod text;
pub mod train;
pub mod vectorize;

pub use classify::{load_model, save_model, ModelKind, Prediction, TrainedModel};
pub use corpus::{Corpus, Document};
pub use evaluate::EvalReport;
