use std::collections::{BTreeMap, HashSet};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{cosine, mean, CowordTable, EmbeddingModel};
use crate::classify::context_words;
use crate::error::{Error, Result};

/// How variant vectors are adjusted and which context words are used.
///
/// * `Basic`: the model as is, every context word.
/// * `Tweak1`: variant vectors moved halfway to their coword centroid,
///   every context word.
/// * `Tweak2`: same vectors as `Tweak1`, but each variant only sees the
///   context words from its own coword set.
/// * `Tweak3`: variant vectors replaced by their coword centroid, context as
///   in `Tweak2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Basic,
    Tweak1,
    Tweak2,
    Tweak3,
}

impl Scheme {
    fn restricts_context(self) -> bool {
        matches!(self, Scheme::Tweak2 | Scheme::Tweak3)
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "basic" => Ok(Scheme::Basic),
            "tweak1" => Ok(Scheme::Tweak1),
            "tweak2" => Ok(Scheme::Tweak2),
            "tweak3" => Ok(Scheme::Tweak3),
            _ => Err(Error::Param(format!("unknown scheme {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnhanceWarning {
    VariantMissing(String),
    NoCowordVectors(String),
}

/// Coword centroid of `variant` in `model`, weighted by co-occurrence counts
/// (or uniformly).
fn coword_centroid(model: &EmbeddingModel, cowords: &CowordTable, variant: &str, weighted: bool) -> Option<Vec<f64>> {
    let vectors = cowords.get(variant).iter().filter_map(|c| {
        model
            .get(&c.word)
            .map(|v| (v, if weighted { c.count as f64 } else { 1.0 }))
    });
    mean(model.dim(), vectors)
}

/// Adjust variant vectors according to `scheme`. All centroids are taken
/// from the input model, so the result does not depend on update order.
pub fn enhance(
    model: &EmbeddingModel,
    cowords: &CowordTable,
    scheme: Scheme,
    weighted: bool,
) -> (EmbeddingModel, Vec<EnhanceWarning>) {
    let mut out = model.clone();
    let mut warnings = Vec::new();
    if scheme == Scheme::Basic {
        return (out, warnings);
    }
    for variant in cowords.variants.keys() {
        let Some(original) = model.get(variant) else {
            warnings.push(EnhanceWarning::VariantMissing(variant.clone()));
            continue;
        };
        let Some(centroid) = coword_centroid(model, cowords, variant, weighted) else {
            warnings.push(EnhanceWarning::NoCowordVectors(variant.clone()));
            continue;
        };
        let updated: Vec<f64> = match scheme {
            Scheme::Tweak3 => centroid,
            _ => original.iter().zip(&centroid).map(|(a, b)| 0.5 * a + 0.5 * b).collect(),
        };
        out.insert(variant, &updated).expect("same dimension");
    }
    (out, warnings)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbRestoration {
    pub variant: String,
    /// Some candidate was scored by its frequency share instead of cosine
    /// similarity (no vector, or no usable context).
    pub fallback: bool,
}

/// Cosine-similarity restorer over an (optionally enhanced) model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRestorer {
    pub scheme: Scheme,
    /// Sticky window size; `None` uses the whole sentence.
    pub window: Option<usize>,
    pub cowords: CowordTable,
    /// wordkey → marked form used to look up context words that are not in
    /// the model under their stripped spelling.
    pub context_forms: BTreeMap<String, String>,
}

impl EmbeddingRestorer {
    fn lookup<'m>(&self, model: &'m EmbeddingModel, word: &str) -> Option<&'m [f64]> {
        model
            .get(word)
            .or_else(|| self.context_forms.get(word).and_then(|f| model.get(f)))
    }

    /// Choose among `candidates` (variant, frequency) for `tokens[target]`.
    pub fn restore(
        &self,
        model: &EmbeddingModel,
        tokens: &[String],
        target: usize,
        candidates: &[(String, usize)],
    ) -> Result<EmbRestoration> {
        let wordkey = tokens.get(target).cloned().unwrap_or_default();
        if !candidates.iter().any(|(v, _)| model.contains(v)) {
            return Err(Error::Unrepresentable(wordkey));
        }
        let ctx = context_words(tokens, target, self.window)?.context;
        let total: usize = candidates.iter().map(|(_, c)| c).sum();
        let prior = |c: usize| if total == 0 { 0.0 } else { c as f64 / total as f64 };

        let shared_ctx = if self.scheme.restricts_context() {
            None
        } else {
            mean(
                model.dim(),
                ctx.iter().filter_map(|w| self.lookup(model, w)).map(|v| (v, 1.0)),
            )
        };
        let ctx_keys: HashSet<&str> = ctx.iter().map(String::as_str).collect();

        let mut fallback = false;
        let mut best: Option<(&str, f64)> = None;
        for (variant, count) in candidates {
            let vector = model.get(variant);
            let context = if self.scheme.restricts_context() {
                let own = self
                    .cowords
                    .get(variant)
                    .iter()
                    .filter(|c| ctx_keys.contains(c.key.as_str()))
                    .filter_map(|c| model.get(&c.word))
                    .map(|v| (v, 1.0));
                mean(model.dim(), own)
            } else {
                shared_ctx.clone()
            };
            let score = match (vector, context) {
                (Some(v), Some(c)) if c.iter().any(|&x| x != 0.0) => cosine(&c, v),
                _ => {
                    fallback = true;
                    prior(*count)
                }
            };
            let better = match best {
                None => true,
                Some((b, s)) => score > s || (score == s && variant.as_str() < b),
            };
            if better {
                best = Some((variant, score));
            }
        }
        Ok(EmbRestoration {
            variant: best.map(|(v, _)| v.to_owned()).unwrap_or_default(),
            fallback,
        })
    }
}
