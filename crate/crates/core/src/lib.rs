//! Diacritic restoration toolkit.
//!
//! Builds restoration datasets from any diacritically marked corpus, trains
//! back-off n-gram, linear-classifier and embedding-based restorers, scores
//! them with per-wordkey confusion matrices and restores whole texts.

pub mod classify;
pub mod corpus;
pub mod datasetgen;
pub mod embed;
pub mod error;
pub mod evaluate;
pub mod ngram;
pub mod pipeline;
pub mod synth;

pub use corpus::{compute_stats, normalize, strip_diacritics, tokenize, Corpus, CorpusStats, Token, TokenKind};
pub use datasetgen::{generate, AmbiguousSet, GenParams, Instance};
pub use error::{Error, Result};
pub use evaluate::{crossval, full_text_eval, metrics, stratified_folds, ConfusionMatrix, MetricReport};
pub use ngram::{NGramModel, VariantIndex};
pub use pipeline::{Fallback, Pipeline, Restorer};
