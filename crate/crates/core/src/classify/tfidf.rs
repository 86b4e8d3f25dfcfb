use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Sparse feature vector: `(column, value)` pairs sorted by column.
pub type SparseVec = Vec<(usize, f64)>;

pub fn dot(w: &[f64], x: &SparseVec) -> f64 {
    x.iter().map(|&(i, v)| w[i] * v).sum()
}

/// Bag-of-words tf-idf vectorizer.
///
/// `idf(t) = ln((1 + N) / (1 + df(t))) + 1`; each transformed vector is
/// scaled to unit L2 norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vectorizer {
    pub vocabulary: BTreeMap<String, usize>,
    pub idf: Vec<f64>,
}

impl Vectorizer {
    pub fn fit<I, D>(docs: I) -> Vectorizer
    where
        I: IntoIterator<Item = D>,
        D: AsRef<[String]>,
    {
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        let mut n_docs = 0usize;
        for doc in docs {
            n_docs += 1;
            let mut seen: Vec<&String> = doc.as_ref().iter().collect();
            seen.sort();
            seen.dedup();
            for t in seen {
                *df.entry(t.clone()).or_default() += 1;
            }
        }
        let mut vocabulary = BTreeMap::new();
        let mut idf = Vec::with_capacity(df.len());
        for (i, (term, d)) in df.into_iter().enumerate() {
            vocabulary.insert(term, i);
            idf.push(((1.0 + n_docs as f64) / (1.0 + d as f64)).ln() + 1.0);
        }
        Vectorizer { vocabulary, idf }
    }

    pub fn dim(&self) -> usize {
        self.idf.len()
    }

    /// tf-idf vector of `doc`; terms outside the vocabulary are ignored.
    pub fn transform(&self, doc: &[String]) -> SparseVec {
        let mut tf: BTreeMap<usize, f64> = BTreeMap::new();
        for t in doc {
            if let Some(&i) = self.vocabulary.get(t) {
                *tf.entry(i).or_default() += 1.0;
            }
        }
        let mut v: SparseVec = tf.into_iter().map(|(i, c)| (i, c * self.idf[i])).collect();
        let norm = v.iter().map(|(_, x)| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, x) in &mut v {
                *x /= norm;
            }
        }
        v
    }
}
