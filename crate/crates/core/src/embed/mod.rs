//! Embedding models: loading, cross-lingual projection, variant enhancement,
//! cosine-similarity restoration and intrinsic evaluation.

mod align;
mod cowords;
mod intrinsic;
mod restore;

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub use align::{project, AlignmentDictionary};
pub use cowords::{build_cowords, Coword, CowordTable};
pub use intrinsic::{
    analogy_mrr, analogy_rank, odd_word, read_analogy, read_oddword, read_wordsim, wordsim_pearson, AnalogyScore,
    OddWordItem, WordsimScore,
};
pub use restore::{enhance, EmbRestoration, EmbeddingRestorer, EnhanceWarning, Scheme};

use crate::corpus::normalize;
use crate::error::{Error, Result};

pub const DEFAULT_WINDOW: usize = 11;

/// Word → dense vector map with a fixed dimension. Insertion order is kept
/// so that saved files are stable.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmbeddingModel {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
}

impl EmbeddingModel {
    pub fn new(dim: usize) -> Self {
        EmbeddingModel {
            dim,
            ..Default::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&i| self.row(i))
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Insert or overwrite the vector of `word`.
    pub fn insert(&mut self, word: &str, vector: &[f64]) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::Param(format!(
                "vector of {word:?} has {} components, model has {}",
                vector.len(),
                self.dim
            )));
        }
        match self.index.get(word) {
            Some(&i) => self.data[i * self.dim..(i + 1) * self.dim].copy_from_slice(vector),
            None => {
                self.index.insert(word.to_owned(), self.words.len());
                self.words.push(word.to_owned());
                self.data.extend_from_slice(vector);
            }
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.words.iter().enumerate().map(|(i, w)| (w.as_str(), self.row(i)))
    }

    /// Parse the word2vec text format: a `V D` header, then one
    /// `word f1 ... fD` row per word.
    pub fn read_from<R: BufRead>(input: R) -> Result<EmbeddingModel> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing header"))?
            .map_err(|e| Error::io("<vectors>", e))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let (count, dim) = match fields.as_slice() {
            [v, d] => (
                v.parse::<usize>().map_err(|_| Error::parse(1, "bad vocabulary size"))?,
                d.parse::<usize>().map_err(|_| Error::parse(1, "bad dimension"))?,
            ),
            _ => return Err(Error::parse(1, "header must be \"V D\"")),
        };
        if dim == 0 {
            return Err(Error::parse(1, "dimension must be positive"));
        }
        let mut model = EmbeddingModel::new(dim);
        let mut buf = Vec::with_capacity(dim);
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line.map_err(|e| Error::io("<vectors>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let word = normalize(parts.next().expect("non-empty line"));
            buf.clear();
            for p in parts {
                let v: f64 = p
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("bad number {p:?}")))?;
                buf.push(v);
            }
            if buf.len() != dim {
                return Err(Error::parse(
                    line_no,
                    format!("expected {dim} components, found {}", buf.len()),
                ));
            }
            model.insert(&word, &buf)?;
        }
        if model.len() != count {
            return Err(Error::parse(
                1,
                format!("header declares {count} words, file has {}", model.len()),
            ));
        }
        if model.data.iter().all(|&v| v == 0.0) {
            return Err(Error::EmptyModel("embedding model has no non-zero vector".into()));
        }
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<EmbeddingModel> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(f))
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e| Error::io("<vectors>", e);
        writeln!(out, "{} {}", self.len(), self.dim).map_err(io)?;
        for (w, v) in self.iter() {
            write!(out, "{w}").map_err(io)?;
            for x in v {
                write!(out, " {x}").map_err(io)?;
            }
            writeln!(out).map_err(io)?;
        }
        out.flush().map_err(io)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(BufWriter::new(f))
    }
}

/// Cosine similarity; zero when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let mut ab = 0.0;
    let mut aa = 0.0;
    let mut bb = 0.0;
    for (x, y) in a.iter().zip(b) {
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        return 0.0;
    }
    (ab / (aa.sqrt() * bb.sqrt())).clamp(-1.0, 1.0)
}

/// Component-wise mean of the given vectors, `None` when there are none.
pub(crate) fn mean<'a, I>(dim: usize, vectors: I) -> Option<Vec<f64>>
where
    I: IntoIterator<Item = (&'a [f64], f64)>,
{
    // Scaling by normalized weights keeps a single vector bit-exact.
    let items: Vec<(&[f64], f64)> = vectors.into_iter().collect();
    let total: f64 = items.iter().map(|(_, w)| w).sum();
    if total <= 0.0 {
        return None;
    }
    let mut acc = vec![0.0; dim];
    for (v, w) in items {
        let share = w / total;
        for (a, x) in acc.iter_mut().zip(v) {
            *a += share * x;
        }
    }
    Some(acc)
}
