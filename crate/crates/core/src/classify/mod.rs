//! Context-window classifiers.
//!
//! Each wordkey gets its own vectorizer and classifier, trained on the
//! sticky-window contexts of its instances.

mod linear;
mod tfidf;
mod window;

use serde::{Deserialize, Serialize};

pub use linear::{logistic_gradient, logistic_loss, train_classifier, ClassifierKind, Hyper, LinearModel, Params};
pub use tfidf::{dot, SparseVec, Vectorizer};
pub use window::{context_words, extract_window, StickyWindow};

use crate::datasetgen::Instance;
use crate::error::Result;

pub const DEFAULT_WINDOW: usize = 9;

/// A trained per-wordkey classifier together with its vectorizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordkeyClassifier {
    pub window: usize,
    #[serde(flatten)]
    pub vectorizer: Vectorizer,
    #[serde(flatten)]
    pub model: LinearModel,
}

impl WordkeyClassifier {
    /// Fit vectorizer and classifier on `instances`.
    pub fn train<'a, I>(instances: I, kind: ClassifierKind, window: usize, hyper: &Hyper) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Instance>,
    {
        let mut contexts = Vec::new();
        let mut labels = Vec::new();
        for inst in instances {
            contexts.push(extract_window(&inst.tokens, inst.target, window)?.context);
            labels.push(inst.label.clone());
        }
        let vectorizer = Vectorizer::fit(&contexts);
        let rows: Vec<SparseVec> = contexts.iter().map(|c| vectorizer.transform(c)).collect();
        let model = train_classifier(kind, &rows, &labels, vectorizer.dim(), hyper)?;
        Ok(WordkeyClassifier {
            window,
            vectorizer,
            model,
        })
    }

    pub fn predict_tokens<S: AsRef<str>>(&self, tokens: &[S], target: usize) -> Result<String> {
        let w = extract_window(tokens, target, self.window)?;
        let x = self.vectorizer.transform(&w.context);
        self.model.predict(&x).map(str::to_owned)
    }

    pub fn predict(&self, inst: &Instance) -> Result<String> {
        self.predict_tokens(&inst.tokens, inst.target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(s: &str, target: usize, label: &str) -> Instance {
        Instance {
            tokens: s.split(' ').map(str::to_owned).collect(),
            target,
            label: label.into(),
            line: None,
        }
    }

    #[test]
    fn learns_context_cue() {
        let mut data = Vec::new();
        for i in 0..20 {
            data.push(inst(&format!("nri akwa riri f{i}"), 1, "àkwá"));
            data.push(inst(&format!("uwe akwa dara g{i}"), 1, "ákwà"));
        }
        for kind in [
            ClassifierKind::Perceptron,
            ClassifierKind::LogisticSgd,
            ClassifierKind::LinearSvmSgd,
            ClassifierKind::MultinomialNb,
        ] {
            let mut h = Hyper::defaults_for(kind);
            h.learning_rate = 0.1;
            let clf = WordkeyClassifier::train(&data, kind, 5, &h).unwrap();
            assert_eq!(clf.predict(&inst("nri akwa", 1, "")).unwrap(), "àkwá", "{kind:?}");
            assert_eq!(clf.predict(&inst("uwe akwa", 1, "")).unwrap(), "ákwà", "{kind:?}");
        }
    }

    #[test]
    fn serialized_layout() {
        let data = vec![inst("a x b", 1, "x1"), inst("c x d", 1, "x2")];
        let clf = WordkeyClassifier::train(
            &data,
            ClassifierKind::MultinomialNb,
            3,
            &Hyper::defaults_for(ClassifierKind::MultinomialNb),
        )
        .unwrap();
        let v: serde_json::Value = serde_json::to_value(&clf).unwrap();
        for key in ["kind", "classes", "vocabulary", "idf", "params", "hyper"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let back: WordkeyClassifier = serde_json::from_value(v).unwrap();
        assert_eq!(back, clf);
    }
}
