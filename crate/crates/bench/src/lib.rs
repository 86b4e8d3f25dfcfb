//! Shared fixtures for the benchmarks.

use diacritix::datasetgen::{generate, AmbiguousSet, GenParams};
use diacritix::embed::EmbeddingModel;
use diacritix::ngram::variant_index_from_sets;
use diacritix::synth;
use diacritix::{Corpus, VariantIndex};

pub struct Fixture {
    pub corpus: Corpus,
    pub text: String,
    pub sets: Vec<AmbiguousSet>,
    pub index: VariantIndex,
}

/// A synthetic marked corpus of about `words` words with 40 planted
/// ambiguous wordkeys.
pub fn fixture(words: usize) -> Fixture {
    let (corpus, _) = synth::gate_corpus(words, 40, 7);
    let text = corpus.to_text();
    let sets = generate(&corpus, &GenParams::default()).expect("default parameters are valid");
    let index = variant_index_from_sets(&sets);
    Fixture {
        corpus,
        text,
        sets,
        index,
    }
}

/// Deterministic pseudo-random vectors for every word type of `corpus`.
pub fn vectors(corpus: &Corpus, dim: usize) -> EmbeddingModel {
    let mut model = EmbeddingModel::new(dim);
    let mut seen = std::collections::BTreeSet::new();
    for t in corpus.words() {
        seen.insert(diacritix::corpus::lowercase(&t.surface));
    }
    for (i, w) in seen.iter().enumerate() {
        let v: Vec<f64> = (0..dim).map(|d| ((i * 31 + d * 17) as f64 * 0.618).sin()).collect();
        model.insert(w, &v).expect("fixed dimension");
    }
    model
}
