//! End-to-end restoration of stripped text.
//!
//! Every word token is looked up by its wordkey. Wordkeys seen with a single
//! dominant form are replaced directly, ambiguous ones go to the trained
//! restorer and anything else is echoed. Non-word tokens pass through.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{ClassifierKind, Hyper, WordkeyClassifier};
use crate::corpus::{lowercase, normalize, Corpus, Token};
use crate::datasetgen::AmbiguousSet;
use crate::embed::{EmbeddingModel, EmbeddingRestorer};
use crate::error::{Error, Result};
use crate::ngram::{dominant_forms, variant_index_from_sets, NGramModel, VariantIndex};

const BUNDLE_VERSION: u32 = 1;

/// What to do with an ambiguous word the restorer cannot decide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fallback {
    /// Leave the word as it came in.
    Echo,
    /// Use its most frequent variant.
    #[default]
    Unigram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Restorer {
    Ngram {
        n: usize,
        model: NGramModel,
    },
    Classifier {
        kind: ClassifierKind,
        window: usize,
        classifiers: BTreeMap<String, WordkeyClassifier>,
    },
    Embedding {
        restorer: EmbeddingRestorer,
        /// word2vec text file, relative paths resolved against the bundle.
        vectors: PathBuf,
        #[serde(skip)]
        model: Option<EmbeddingModel>,
    },
}

impl Restorer {
    pub fn name(&self) -> &'static str {
        match self {
            Restorer::Ngram { .. } => "ngram",
            Restorer::Classifier { .. } => "classifier",
            Restorer::Embedding { .. } => "embedding",
        }
    }
}

/// Train one classifier per ambiguous set.
pub fn train_classifiers(
    sets: &[AmbiguousSet],
    kind: ClassifierKind,
    window: usize,
    hyper: &Hyper,
) -> Result<BTreeMap<String, WordkeyClassifier>> {
    sets.par_iter()
        .map(|s| {
            Ok((
                s.wordkey.clone(),
                WordkeyClassifier::train(&s.instances, kind, window, hyper)?,
            ))
        })
        .collect()
}

/// A trained restorer together with the lookup tables built from its
/// training corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub version: u32,
    pub lowercase: bool,
    pub fallback: Fallback,
    /// wordkey → form, for every word outside `variant_index`.
    pub unambiguous_map: BTreeMap<String, String>,
    pub variant_index: VariantIndex,
    pub restorer: Restorer,
}

impl Pipeline {
    /// Build the lookup tables from the marked training `corpus`. The
    /// variant index comes from `sets` (for n-gram restorers, from the
    /// model, whose counts reflect the corpus it was trained on).
    pub fn new(corpus: &Corpus, sets: &[AmbiguousSet], lowercase: bool, restorer: Restorer) -> Pipeline {
        let variant_index = match &restorer {
            Restorer::Ngram { model, .. } => model.variant_index().clone(),
            _ => variant_index_from_sets(sets),
        };
        let unambiguous_map = dominant_forms(corpus, lowercase, &variant_index, |_| true);
        Pipeline {
            version: BUNDLE_VERSION,
            lowercase,
            fallback: Fallback::default(),
            unambiguous_map,
            variant_index,
            restorer,
        }
    }

    pub fn with_fallback(mut self, fallback: Fallback) -> Pipeline {
        self.fallback = fallback;
        self
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(BufWriter::new(f), self)?;
        Ok(())
    }

    /// Read a bundle, loading embedding vectors where needed.
    pub fn load(path: impl AsRef<Path>) -> Result<Pipeline> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut p: Pipeline =
            serde_json::from_reader(BufReader::new(f)).map_err(|e| Error::Model(format!("{}: {e}", path.display())))?;
        if p.version != BUNDLE_VERSION {
            return Err(Error::Model(format!("unsupported bundle version {}", p.version)));
        }
        if let Restorer::Embedding { vectors, model, .. } = &mut p.restorer {
            let resolved = match path.parent() {
                Some(dir) if vectors.is_relative() => dir.join(&*vectors),
                _ => vectors.clone(),
            };
            *model = Some(EmbeddingModel::load(resolved)?);
        }
        Ok(p)
    }

    fn key_of(&self, t: &Token) -> String {
        if self.lowercase {
            t.wordkey_lower()
        } else {
            t.wordkey.clone()
        }
    }

    fn unigram(&self, key: &str) -> Option<String> {
        self.variant_index.get(key).and_then(|vs| {
            vs.iter()
                .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)))
                .map(|(v, _)| v.clone())
        })
    }

    /// The restorer's choice for `keys[pos]`; `left` holds the restored
    /// forms of the tokens before it.
    fn choose(&self, keys: &[String], left: &[String], pos: usize) -> Result<String> {
        let key = &keys[pos];
        match &self.restorer {
            Restorer::Ngram { n, model } => model.choose_variant(left, key, *n),
            Restorer::Classifier { classifiers, .. } => classifiers
                .get(key)
                .ok_or_else(|| Error::UnknownWordkey(key.clone()))?
                .predict_tokens(keys, pos),
            Restorer::Embedding { restorer, model, .. } => {
                let model = model
                    .as_ref()
                    .ok_or_else(|| Error::Model("embedding vectors not loaded".into()))?;
                let cands = self.variant_index.get(key).map(Vec::as_slice).unwrap_or(&[]);
                Ok(restorer.restore(model, keys, pos, cands)?.variant)
            }
        }
    }

    fn restore_line(&self, line: &[Token]) -> Result<Vec<Token>> {
        let keys: Vec<String> = line
            .iter()
            .map(|t| {
                if !t.is_word() {
                    t.surface.clone()
                } else {
                    self.key_of(t)
                }
            })
            .collect();
        let mut left: Vec<String> = Vec::with_capacity(line.len());
        let mut out = Vec::with_capacity(line.len());
        for (pos, t) in line.iter().enumerate() {
            if !t.is_word() {
                left.push(if self.lowercase {
                    lowercase(&t.surface)
                } else {
                    t.surface.clone()
                });
                out.push(t.clone());
                continue;
            }
            let key = &keys[pos];
            let form = if let Some(form) = self.unambiguous_map.get(key) {
                Some(form.clone())
            } else if self.variant_index.contains_key(key) {
                match self.choose(&keys, &left, pos) {
                    Ok(v) => Some(v),
                    Err(Error::Model(m)) => return Err(Error::Model(m)),
                    Err(_) => match self.fallback {
                        Fallback::Unigram => self.unigram(key),
                        Fallback::Echo => None,
                    },
                }
            } else {
                None
            };
            match form {
                Some(f) => {
                    left.push(f.clone());
                    out.push(t.respelled(&transfer_case(&t.surface, &f)));
                }
                None => {
                    left.push(key.clone());
                    out.push(t.clone());
                }
            }
        }
        Ok(out)
    }

    /// Restore every line of `stripped`. Token and line counts are kept.
    pub fn restore_text(&self, stripped: &Corpus) -> Result<Corpus> {
        let lines = stripped
            .lines
            .par_iter()
            .map(|l| self.restore_line(l))
            .collect::<Result<Vec<_>>>()?;
        Ok(Corpus { lines, is_marked: true })
    }
}

/// Copy the capitalization pattern of `source` (all caps or initial
/// capital) onto `target`.
pub fn transfer_case(source: &str, target: &str) -> String {
    let letters: Vec<char> = source.chars().filter(|c| c.is_alphabetic()).collect();
    let Some(first) = letters.first() else {
        return target.to_owned();
    };
    if letters.len() > 1 && letters.iter().all(|c| !c.is_lowercase()) {
        return normalize(&target.to_uppercase());
    }
    if first.is_uppercase() {
        let mut chars = target.chars();
        if let Some(c) = chars.next() {
            return normalize(&(c.to_uppercase().collect::<String>() + chars.as_str()));
        }
    }
    target.to_owned()
}
