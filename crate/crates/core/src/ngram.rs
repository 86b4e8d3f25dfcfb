//! Back-off n-gram restoration.
//!
//! Counts are kept for every occurrence of a candidate variant together with
//! the marked tokens that precede it on its line. At restoration time the
//! variant with the highest count after the longest available left context
//! wins; a tie or an all-zero score falls back to a shorter context, ending
//! at plain variant frequency.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{lowercase, strip_diacritics, Corpus};
use crate::datasetgen::{AmbiguousSet, Instance};
use crate::error::{Error, Result};

/// wordkey → candidate variants with their unigram counts.
pub type VariantIndex = BTreeMap<String, Vec<(String, usize)>>;

const MODEL_VERSION: u32 = 1;

pub fn variant_index_from_sets(sets: &[AmbiguousSet]) -> VariantIndex {
    sets.iter().map(|s| (s.wordkey.clone(), s.variants.clone())).collect()
}

/// The most frequent surface of every wordkey that is not in `exclude`
/// (ties lexicographic). For wordkeys with a single surface this is their
/// unique marked form.
pub fn dominant_forms<F>(corpus: &Corpus, lower: bool, exclude: &VariantIndex, keep_line: F) -> BTreeMap<String, String>
where
    F: Fn(usize) -> bool,
{
    let mut counts: HashMap<String, HashMap<String, usize>> = HashMap::new();
    for (i, line) in corpus.lines.iter().enumerate() {
        if !keep_line(i) {
            continue;
        }
        for t in line.iter().filter(|t| t.is_word()) {
            let (key, form) = if lower {
                (t.wordkey_lower(), lowercase(&t.surface))
            } else {
                (t.wordkey.clone(), t.surface.clone())
            };
            if exclude.contains_key(&key) {
                continue;
            }
            *counts.entry(key).or_default().entry(form).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .map(|(key, forms)| {
            let best = forms
                .into_iter()
                .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)))
                .map(|(f, _)| f)
                .unwrap_or_default();
            (key, best)
        })
        .collect()
}

type Level = HashMap<Vec<String>, HashMap<String, usize>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ModelFile", try_from = "ModelFile")]
pub struct NGramModel {
    max_n: usize,
    lowercase: bool,
    /// `levels[k - 1]` maps a context of k - 1 marked tokens to variant counts.
    levels: Vec<Level>,
    variant_index: VariantIndex,
    context_forms: BTreeMap<String, String>,
}

impl NGramModel {
    /// Count every occurrence of the indexed variants in `corpus`.
    pub fn train(corpus: &Corpus, max_n: usize, candidates: &VariantIndex, lowercase: bool) -> Result<NGramModel> {
        Self::train_on_lines(corpus, max_n, candidates, lowercase, |_| true)
    }

    /// Like [`NGramModel::train`] but only counting lines accepted by
    /// `keep_line`.
    pub fn train_on_lines<F>(
        corpus: &Corpus,
        max_n: usize,
        candidates: &VariantIndex,
        lower: bool,
        keep_line: F,
    ) -> Result<NGramModel>
    where
        F: Fn(usize) -> bool,
    {
        if max_n < 1 {
            return Err(Error::Param("max_n must be at least 1".into()));
        }
        let mut variant_of: HashMap<&str, &str> = HashMap::new();
        for (key, vs) in candidates {
            for (v, _) in vs {
                variant_of.insert(v, key);
            }
        }

        let mut levels: Vec<Level> = vec![Level::new(); max_n];
        for (i, line) in corpus.lines.iter().enumerate() {
            if !keep_line(i) {
                continue;
            }
            let forms: Vec<String> = line
                .iter()
                .map(|t| {
                    if lower {
                        lowercase(&t.surface)
                    } else {
                        t.surface.clone()
                    }
                })
                .collect();
            for (pos, form) in forms.iter().enumerate() {
                if !variant_of.contains_key(form.as_str()) {
                    continue;
                }
                for k in 1..=max_n.min(pos + 1) {
                    let ctx = forms[pos + 1 - k..pos].to_vec();
                    *levels[k - 1].entry(ctx).or_default().entry(form.clone()).or_default() += 1;
                }
            }
        }

        let unigrams = levels[0].get(&Vec::new());
        let variant_index = candidates
            .iter()
            .map(|(key, vs)| {
                let counted = vs
                    .iter()
                    .map(|(v, _)| (v.clone(), unigrams.and_then(|m| m.get(v)).copied().unwrap_or(0)))
                    .collect();
                (key.clone(), counted)
            })
            .collect();
        let context_forms = dominant_forms(corpus, lower, candidates, keep_line);

        Ok(NGramModel {
            max_n,
            lowercase: lower,
            levels,
            variant_index,
            context_forms,
        })
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    pub fn lowercase(&self) -> bool {
        self.lowercase
    }

    pub fn variant_index(&self) -> &VariantIndex {
        &self.variant_index
    }

    pub fn context_forms(&self) -> &BTreeMap<String, String> {
        &self.context_forms
    }

    /// Raw count of `variant` after `context` (level `context.len() + 1`).
    pub fn count(&self, context: &[String], variant: &str) -> usize {
        self.levels
            .get(context.len())
            .and_then(|lvl| lvl.get(context))
            .and_then(|m| m.get(variant))
            .copied()
            .unwrap_or(0)
    }

    /// Iterate `(context, variant, count)` entries of level `k`.
    pub fn entries(&self, k: usize) -> impl Iterator<Item = (&[String], &str, usize)> {
        self.levels
            .get(k.wrapping_sub(1))
            .into_iter()
            .flat_map(|lvl| lvl.iter())
            .flat_map(|(ctx, m)| m.iter().map(move |(v, c)| (ctx.as_slice(), v.as_str(), *c)))
    }

    fn check_order(&self, n: usize) -> Result<()> {
        if n < 1 || n > self.max_n {
            return Err(Error::Param(format!("order {n} outside 1..={}", self.max_n)));
        }
        Ok(())
    }

    /// Pick a variant of `wordkey` given already-restored marked tokens to
    /// its left, using contexts of up to `n - 1` tokens.
    pub fn choose_variant(&self, left: &[String], wordkey: &str, n: usize) -> Result<String> {
        self.check_order(n)?;
        let cands = self
            .variant_index
            .get(wordkey)
            .filter(|c| !c.is_empty())
            .ok_or_else(|| Error::UnknownWordkey(wordkey.to_owned()))?;

        for k in (2..=n).rev() {
            if left.len() < k - 1 {
                continue;
            }
            let ctx = &left[left.len() - (k - 1)..];
            let Some(counts) = self.levels[k - 1].get(ctx) else {
                continue;
            };
            let scores = cands.iter().map(|(v, _)| (v, counts.get(v).copied().unwrap_or(0)));
            if let Some(best) = unique_max(scores) {
                return Ok(best.clone());
            }
        }

        let best = cands
            .iter()
            .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)))
            .map(|(v, _)| v.clone());
        Ok(best.unwrap_or_default())
    }

    /// Restore the target of `inst`, first restoring every earlier token
    /// left to right so that the target sees a marked context.
    pub fn restore_instance(&self, inst: &Instance, n: usize) -> Result<String> {
        self.check_order(n)?;
        if inst.target >= inst.tokens.len() {
            return Err(Error::Param("target index out of range".into()));
        }
        let mut left: Vec<String> = Vec::with_capacity(inst.target);
        for tok in &inst.tokens[..inst.target] {
            let restored = if self.variant_index.contains_key(tok) {
                self.choose_variant(&left, tok, n)?
            } else if let Some(form) = self.context_forms.get(tok) {
                form.clone()
            } else {
                tok.clone()
            };
            left.push(restored);
        }
        self.choose_variant(&left, inst.wordkey(), n)
    }

    /// `count(context, variant) / Σ count(context, v)` over the candidates
    /// sharing the variant's wordkey. `None` when the context was never seen
    /// with any of them.
    pub fn restore_probability(&self, context: &[String], variant: &str) -> Result<Option<f64>> {
        let k = context.len() + 1;
        if k > self.max_n {
            return Err(Error::Param(format!("no level {k} in a {}-gram model", self.max_n)));
        }
        let key = strip_diacritics(variant);
        let key = if self.lowercase { lowercase(&key) } else { key };
        let siblings: Vec<&str> = match self.variant_index.get(&key) {
            Some(vs) => vs.iter().map(|(v, _)| v.as_str()).collect(),
            None => vec![variant],
        };
        let total: usize = siblings.iter().map(|v| self.count(context, v)).sum();
        if total == 0 {
            return Ok(None);
        }
        Ok(Some(self.count(context, variant) as f64 / total as f64))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(BufWriter::new(f), self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<NGramModel> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_reader(BufReader::new(f)).map_err(|e| Error::Model(e.to_string()))
    }

    fn to_file(&self) -> ModelFile {
        let levels = (1..=self.max_n)
            .map(|k| {
                let mut entries: Vec<(Vec<String>, String, usize)> =
                    self.entries(k).map(|(c, v, n)| (c.to_vec(), v.to_owned(), n)).collect();
                entries.sort();
                LevelFile { k, entries }
            })
            .collect();
        ModelFile {
            version: MODEL_VERSION,
            max_n: self.max_n,
            lowercase: self.lowercase,
            levels,
            variant_index: self.variant_index.clone(),
            context_forms: self.context_forms.clone(),
        }
    }

    fn from_file(file: ModelFile) -> Result<NGramModel> {
        if file.version != MODEL_VERSION {
            return Err(Error::Model(format!(
                "unsupported n-gram model version {}",
                file.version
            )));
        }
        if file.max_n < 1 {
            return Err(Error::Model("max_n must be at least 1".into()));
        }
        let mut levels = vec![Level::new(); file.max_n];
        for lvl in file.levels {
            if lvl.k < 1 || lvl.k > file.max_n {
                return Err(Error::Model(format!("level {} outside 1..={}", lvl.k, file.max_n)));
            }
            for (ctx, v, c) in lvl.entries {
                if ctx.len() != lvl.k - 1 {
                    return Err(Error::Model(format!("context length {} at level {}", ctx.len(), lvl.k)));
                }
                *levels[lvl.k - 1].entry(ctx).or_default().entry(v).or_default() += c;
            }
        }
        Ok(NGramModel {
            max_n: file.max_n,
            lowercase: file.lowercase,
            levels,
            variant_index: file.variant_index,
            context_forms: file.context_forms,
        })
    }
}

impl From<NGramModel> for ModelFile {
    fn from(m: NGramModel) -> ModelFile {
        m.to_file()
    }
}

impl TryFrom<ModelFile> for NGramModel {
    type Error = Error;

    fn try_from(file: ModelFile) -> Result<NGramModel> {
        NGramModel::from_file(file)
    }
}

/// The unique highest nonzero score, if any.
fn unique_max<'a, I>(scores: I) -> Option<&'a String>
where
    I: Iterator<Item = (&'a String, usize)>,
{
    let mut best: Option<(&String, usize)> = None;
    let mut tied = false;
    for (v, s) in scores {
        match best {
            Some((_, b)) if s < b => {}
            Some((_, b)) if s == b => tied = true,
            _ => {
                best = Some((v, s));
                tied = false;
            }
        }
    }
    match best {
        Some((v, s)) if s > 0 && !tied => Some(v),
        _ => None,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LevelFile {
    k: usize,
    entries: Vec<(Vec<String>, String, usize)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    max_n: usize,
    lowercase: bool,
    levels: Vec<LevelFile>,
    variant_index: VariantIndex,
    context_forms: BTreeMap<String, String>,
}
