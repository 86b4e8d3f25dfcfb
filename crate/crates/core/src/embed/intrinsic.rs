//! Intrinsic probes: odd word out, analogies scored by reciprocal rank, and
//! word-similarity correlation.

use std::cmp::Ordering;
use std::io::BufRead;

use serde::Serialize;

use super::{cosine, EmbeddingModel};
use crate::corpus::normalize;
use crate::error::{Error, Result};

/// The word least similar on average to the other three.
///
/// A single out-of-vocabulary word is the odd one by definition; with more
/// than one the item cannot be judged and `None` is returned.
pub fn odd_word(model: &EmbeddingModel, words: &[String; 4]) -> Option<String> {
    let oov: Vec<&String> = words.iter().filter(|w| !model.contains(w)).collect();
    match oov.len() {
        0 => {}
        1 => return Some(oov[0].clone()),
        _ => return None,
    }
    let vecs: Vec<&[f64]> = words.iter().map(|w| model.get(w).expect("in vocabulary")).collect();
    let mean_sim = |i: usize| {
        (0..4)
            .filter(|&j| j != i)
            .map(|j| cosine(vecs[i], vecs[j]))
            .sum::<f64>()
            / 3.0
    };
    (0..4)
        .map(|i| (mean_sim(i), &words[i]))
        .min_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.1.cmp(b.1))
        })
        .map(|(_, w)| w.clone())
}

/// 1-based rank of `d` among all words except `a`, `b`, `c`, ordered by
/// similarity to `b - a + c`. `None` when any word is out of vocabulary.
pub fn analogy_rank(model: &EmbeddingModel, a: &str, b: &str, c: &str, d: &str) -> Option<usize> {
    let (va, vb, vc, vd) = (model.get(a)?, model.get(b)?, model.get(c)?, model.get(d)?);
    let query: Vec<f64> = (0..model.dim()).map(|i| vb[i] - va[i] + vc[i]).collect();
    let target = cosine(&query, vd);
    let ahead = model
        .iter()
        .filter(|(w, _)| ![a, b, c, d].contains(w))
        .filter(|(w, v)| {
            let s = cosine(&query, v);
            s > target || (s == target && *w < d)
        })
        .count();
    Some(ahead + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalogyScore {
    pub mrr: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

/// Mean reciprocal rank over `quads`; an answer outside the top `list_len`
/// scores zero. Quads with out-of-vocabulary words are skipped.
pub fn analogy_mrr(model: &EmbeddingModel, quads: &[[String; 4]], list_len: usize) -> AnalogyScore {
    let mut total = 0.0;
    let mut evaluated = 0;
    for [a, b, c, d] in quads {
        if let Some(rank) = analogy_rank(model, a, b, c, d) {
            evaluated += 1;
            if rank <= list_len {
                total += 1.0 / rank as f64;
            }
        }
    }
    AnalogyScore {
        mrr: if evaluated == 0 { 0.0 } else { total / evaluated as f64 },
        evaluated,
        skipped: quads.len() - evaluated,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WordsimScore {
    pub pearson: f64,
    pub pairs_used: usize,
}

/// Pearson correlation between model cosine similarities and human scores
/// over the in-vocabulary pairs.
pub fn wordsim_pearson(model: &EmbeddingModel, pairs: &[(String, String, f64)]) -> Result<WordsimScore> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = pairs
        .iter()
        .filter_map(|(a, b, h)| Some((cosine(model.get(a)?, model.get(b)?), *h)))
        .unzip();
    let n = xs.len();
    if n < 2 {
        return Err(Error::Param(format!("only {n} usable word pairs")));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Param("constant scores have no correlation".into()));
    }
    Ok(WordsimScore {
        pearson: (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0),
        pairs_used: n,
    })
}

fn tsv_rows<R: BufRead>(input: R, width: usize) -> Result<Vec<(usize, Vec<String>)>> {
    let mut rows = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<intrinsic>", e))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<String> = line
            .split(['\t', ' '])
            .filter(|f| !f.is_empty())
            .map(normalize)
            .collect();
        if fields.len() != width {
            return Err(Error::parse(
                i + 1,
                format!("expected {width} fields, found {}", fields.len()),
            ));
        }
        rows.push((i + 1, fields));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OddWordItem {
    pub words: [String; 4],
    pub odd: String,
}

/// Rows of `w1 w2 w3 w4 odd`.
pub fn read_oddword<R: BufRead>(input: R) -> Result<Vec<OddWordItem>> {
    tsv_rows(input, 5)?
        .into_iter()
        .map(|(_, f)| {
            let [a, b, c, d, odd]: [String; 5] = f.try_into().expect("width checked");
            Ok(OddWordItem {
                words: [a, b, c, d],
                odd,
            })
        })
        .collect()
}

/// Rows of `a b c d`.
pub fn read_analogy<R: BufRead>(input: R) -> Result<Vec<[String; 4]>> {
    Ok(tsv_rows(input, 4)?
        .into_iter()
        .map(|(_, f)| f.try_into().expect("width checked"))
        .collect())
}

/// Rows of `w1 w2 score`, score in [0, 10].
pub fn read_wordsim<R: BufRead>(input: R) -> Result<Vec<(String, String, f64)>> {
    tsv_rows(input, 3)?
        .into_iter()
        .map(|(line, f)| {
            let [a, b, s]: [String; 3] = f.try_into().expect("width checked");
            let score: f64 = s.parse().map_err(|_| Error::parse(line, format!("bad score {s:?}")))?;
            if !(0.0..=10.0).contains(&score) {
                return Err(Error::parse(line, format!("score {score} outside [0, 10]")));
            }
            Ok((a, b, score))
        })
        .collect()
}
