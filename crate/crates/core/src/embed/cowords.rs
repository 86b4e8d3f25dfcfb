use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::classify::context_words;
use crate::corpus::{lowercase, strip_diacritics, Corpus};
use crate::datasetgen::AmbiguousSet;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coword {
    /// Marked form, as it appears in the corpus.
    pub word: String,
    /// Stripped form, as it appears in restoration contexts.
    pub key: String,
    pub count: usize,
}

/// Per variant, the most frequent co-occurring words that co-occur with no
/// sibling variant's top list.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CowordTable {
    pub top_n: usize,
    pub variants: BTreeMap<String, Vec<Coword>>,
}

impl CowordTable {
    pub fn get(&self, variant: &str) -> &[Coword] {
        self.variants.get(variant).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Count the words around every occurrence of each variant in the marked
/// `corpus` (whole sentence when `window` is `None`), keep the `top_n` most
/// frequent per variant and then drop words shared with a sibling's top
/// list.
pub fn build_cowords(
    corpus: &Corpus,
    sets: &[AmbiguousSet],
    top_n: usize,
    window: Option<usize>,
    lower: bool,
) -> Result<CowordTable> {
    let mut owner: HashMap<&str, usize> = HashMap::new();
    for (i, s) in sets.iter().enumerate() {
        for (v, _) in &s.variants {
            owner.insert(v, i);
        }
    }

    let mut counts: HashMap<String, HashMap<String, usize>> = HashMap::new();
    for line in &corpus.lines {
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
            if !owner.contains_key(form.as_str()) {
                continue;
            }
            let ctx = context_words(&forms, pos, window)?;
            let entry = counts.entry(form.clone()).or_default();
            for w in ctx.context {
                *entry.entry(w).or_default() += 1;
            }
        }
    }

    let mut table = CowordTable {
        top_n,
        variants: BTreeMap::new(),
    };
    for set in sets {
        let tops: Vec<(String, Vec<(String, usize)>)> = set
            .variants
            .iter()
            .map(|(v, _)| {
                let mut words: Vec<(String, usize)> = counts
                    .get(v)
                    .map(|m| m.iter().map(|(w, c)| (w.clone(), *c)).collect())
                    .unwrap_or_default();
                words.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
                words.truncate(top_n);
                (v.clone(), words)
            })
            .collect();
        for (i, (v, words)) in tops.iter().enumerate() {
            let shared: BTreeSet<&str> = tops
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .flat_map(|(_, (_, ws))| ws.iter().map(|(w, _)| w.as_str()))
                .collect();
            let kept = words
                .iter()
                .filter(|(w, _)| !shared.contains(w.as_str()))
                .map(|(w, c)| Coword {
                    word: w.clone(),
                    key: strip_diacritics(w),
                    count: *c,
                })
                .collect();
            table.variants.insert(v.clone(), kept);
        }
    }
    Ok(table)
}
