//! Ambiguous-dataset generation.
//!
//! Word tokens are grouped by wordkey and three gates decide which wordkeys
//! become restoration problems:
//!
//! * `varnt_rep`: a variant holding less than this share of its wordkey is
//!   discarded and its count removed from the wordkey total;
//! * `wdkey_rep`: the remaining wordkey total must reach this fraction of all
//!   word tokens;
//! * `varnt_distrib`: the dominant variant may not hold more than this share,
//!   otherwise always guessing it is already good enough.
//!
//! Wordkeys left with fewer than two variants are dropped as well.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{lowercase, Corpus, Token};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub varnt_rep: f64,
    pub wdkey_rep: f64,
    pub varnt_distrib: f64,
    pub lowercase: bool,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            varnt_rep: 0.05,
            wdkey_rep: 0.0001,
            varnt_distrib: 0.75,
            lowercase: true,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.varnt_rep) {
            return Err(Error::Param(format!("varnt_rep {} not in [0, 1)", self.varnt_rep)));
        }
        if !(self.wdkey_rep > 0.0 && self.wdkey_rep < 1.0) {
            return Err(Error::Param(format!("wdkey_rep {} not in (0, 1)", self.wdkey_rep)));
        }
        if !(self.varnt_distrib > 0.0 && self.varnt_distrib <= 1.0) {
            return Err(Error::Param(format!(
                "varnt_distrib {} not in (0, 1]",
                self.varnt_distrib
            )));
        }
        Ok(())
    }
}

/// One occurrence of an ambiguous wordkey.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    /// The whole sentence, stripped (and lowercased when generating with
    /// `lowercase`).
    pub tokens: Vec<String>,
    pub target: usize,
    /// The marked variant found in the corpus.
    pub label: String,
    /// Index of the source line in the corpus, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
}

impl Instance {
    pub fn wordkey(&self) -> &str {
        &self.tokens[self.target]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmbiguousSet {
    pub wordkey: String,
    /// Surviving variants, most frequent first.
    pub variants: Vec<(String, usize)>,
    pub instances: Vec<Instance>,
}

impl AmbiguousSet {
    pub fn total(&self) -> usize {
        self.variants.iter().map(|(_, c)| c).sum()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.instances.iter().map(|i| i.label.as_str()).collect()
    }

    pub fn variant_names(&self) -> Vec<String> {
        self.variants.iter().map(|(v, _)| v.clone()).collect()
    }
}

/// `C(wordkeys) / C(tokens) * 100`.
pub fn app_threshold(wordkey_count: usize, token_count: usize) -> Result<f64> {
    if token_count == 0 {
        return Err(Error::Param("token count is zero".into()));
    }
    Ok(wordkey_count as f64 / token_count as f64 * 100.0)
}

/// One minus the dominant variant's share: 0 for a single class, approaching
/// `1 - 1/k` for k evenly spread classes.
pub fn entropy_proxy(variant_counts: &[usize]) -> Result<f64> {
    let total: usize = variant_counts.iter().sum();
    let max = variant_counts.iter().copied().max();
    match max {
        Some(max) if total > 0 => Ok(1.0 - max as f64 / total as f64),
        _ => Err(Error::Param("variant counts are empty".into())),
    }
}

fn surface_form(t: &Token, lower: bool) -> String {
    if lower {
        lowercase(&t.surface)
    } else {
        t.surface.clone()
    }
}

/// Apply the three gates to raw variant counts. Returns surviving variants
/// sorted by count (descending, ties lexicographic), or `None` when the
/// wordkey is dropped.
pub fn apply_gates(
    counts: &HashMap<String, usize>,
    word_tokens: usize,
    params: &GenParams,
) -> Option<Vec<(String, usize)>> {
    let original: usize = counts.values().sum();
    if original == 0 || word_tokens == 0 {
        return None;
    }
    let mut kept: Vec<(String, usize)> = counts
        .iter()
        .filter(|(_, &c)| c as f64 / original as f64 >= params.varnt_rep)
        .map(|(v, &c)| (v.clone(), c))
        .collect();
    let total: usize = kept.iter().map(|(_, c)| c).sum();
    if (total as f64 / word_tokens as f64) < params.wdkey_rep {
        return None;
    }
    if kept.len() < 2 {
        return None;
    }
    let dominant = kept.iter().map(|(_, c)| *c).max().unwrap_or(0);
    if dominant as f64 / total as f64 > params.varnt_distrib {
        return None;
    }
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Some(kept)
}

/// Build the ambiguous sets of `corpus`.
pub fn generate(corpus: &Corpus, params: &GenParams) -> Result<Vec<AmbiguousSet>> {
    params.validate()?;
    let lower = params.lowercase;

    let mut counts: HashMap<String, HashMap<String, usize>> = HashMap::new();
    let mut word_tokens = 0usize;
    for t in corpus.words() {
        word_tokens += 1;
        let key = if lower { t.wordkey_lower() } else { t.wordkey.clone() };
        *counts
            .entry(key)
            .or_default()
            .entry(surface_form(t, lower))
            .or_default() += 1;
    }

    let mut survivors: HashMap<String, AmbiguousSet> = counts
        .iter()
        .filter_map(|(key, variants)| {
            apply_gates(variants, word_tokens, params).map(|kept| {
                (
                    key.clone(),
                    AmbiguousSet {
                        wordkey: key.clone(),
                        variants: kept,
                        instances: Vec::new(),
                    },
                )
            })
        })
        .collect();

    for (line_no, line) in corpus.lines.iter().enumerate() {
        let mut stripped: Option<Vec<String>> = None;
        for (pos, t) in line.iter().enumerate() {
            if !t.is_word() {
                continue;
            }
            let key = if lower { t.wordkey_lower() } else { t.wordkey.clone() };
            let Some(set) = survivors.get_mut(&key) else {
                continue;
            };
            let label = surface_form(t, lower);
            if !set.variants.iter().any(|(v, _)| *v == label) {
                continue;
            }
            let tokens = stripped
                .get_or_insert_with(|| {
                    line.iter()
                        .map(|t| {
                            let s = if t.is_word() { &t.wordkey } else { &t.surface };
                            if lower {
                                lowercase(s)
                            } else {
                                s.clone()
                            }
                        })
                        .collect()
                })
                .clone();
            set.instances.push(Instance {
                tokens,
                target: pos,
                label,
                line: Some(line_no),
            });
        }
    }

    let mut sets: Vec<AmbiguousSet> = survivors.into_values().collect();
    sets.sort_by(|a, b| b.total().cmp(&a.total()).then_with(|| a.wordkey.cmp(&b.wordkey)));
    Ok(sets)
}

#[derive(Serialize, Deserialize)]
struct HeaderRecord {
    wordkey: String,
    variants: Vec<(String, usize)>,
}

#[derive(Serialize, Deserialize)]
struct InstanceRecord {
    wordkey: String,
    #[serde(flatten)]
    instance: Instance,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Record {
    Header(HeaderRecord),
    Instance(InstanceRecord),
}

/// Serialize datasets as JSON Lines: a header record per wordkey followed by
/// its instances.
pub fn write_dataset_to<W: Write>(sets: &[AmbiguousSet], mut out: W) -> Result<()> {
    for set in sets {
        let header = HeaderRecord {
            wordkey: set.wordkey.clone(),
            variants: set.variants.clone(),
        };
        serde_json::to_writer(&mut out, &header)?;
        out.write_all(b"\n").map_err(|e| Error::io("<dataset>", e))?;
        for inst in &set.instances {
            let rec = InstanceRecord {
                wordkey: set.wordkey.clone(),
                instance: inst.clone(),
            };
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n").map_err(|e| Error::io("<dataset>", e))?;
        }
    }
    out.flush().map_err(|e| Error::io("<dataset>", e))
}

pub fn write_dataset(sets: &[AmbiguousSet], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset_to(sets, BufWriter::new(f))
}

pub fn read_dataset_from<R: BufRead>(input: R) -> Result<Vec<AmbiguousSet>> {
    let mut sets: Vec<AmbiguousSet> = Vec::new();
    let mut header_line = 0;
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io("<dataset>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record =
            serde_json::from_str(&line).map_err(|e| Error::parse(line_no, format!("malformed record: {e}")))?;
        match record {
            Record::Header(h) => {
                if let Some(prev) = sets.last() {
                    check_set(prev, header_line)?;
                }
                header_line = line_no;
                sets.push(AmbiguousSet {
                    wordkey: h.wordkey,
                    variants: h.variants,
                    instances: Vec::new(),
                });
            }
            Record::Instance(r) => {
                let Some(set) = sets.last_mut() else {
                    return Err(Error::parse(line_no, "instance before any wordkey header"));
                };
                if r.wordkey != set.wordkey {
                    return Err(Error::parse(
                        line_no,
                        format!("instance of {:?} under header {:?}", r.wordkey, set.wordkey),
                    ));
                }
                if r.instance.target >= r.instance.tokens.len() {
                    return Err(Error::parse(line_no, "target index out of range"));
                }
                set.instances.push(r.instance);
            }
        }
    }
    if let Some(prev) = sets.last() {
        check_set(prev, header_line)?;
    }
    Ok(sets)
}

fn check_set(set: &AmbiguousSet, header_line: usize) -> Result<()> {
    if set.instances.len() != set.total() {
        return Err(Error::parse(
            header_line,
            format!(
                "wordkey {:?} declares {} occurrences but has {} instances",
                set.wordkey,
                set.total(),
                set.instances.len()
            ),
        ));
    }
    Ok(())
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<AmbiguousSet>> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset_from(BufReader::new(f))
}
