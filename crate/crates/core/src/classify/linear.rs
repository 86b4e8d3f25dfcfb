//! Linear classifiers trained one-vs-rest, plus multinomial naive Bayes.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tfidf::{dot, SparseVec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Perceptron,
    LogisticSgd,
    LinearSvmSgd,
    MultinomialNb,
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perceptron" => Ok(ClassifierKind::Perceptron),
            "logistic" | "logistic_sgd" | "lr" => Ok(ClassifierKind::LogisticSgd),
            "svm" | "linear_svm_sgd" => Ok(ClassifierKind::LinearSvmSgd),
            "nb" | "multinomial_nb" => Ok(ClassifierKind::MultinomialNb),
            _ => Err(Error::Param(format!("unknown classifier kind {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    /// Additive smoothing for naive Bayes.
    pub alpha: f64,
    pub seed: u64,
}

impl Hyper {
    pub fn defaults_for(kind: ClassifierKind) -> Hyper {
        let learning_rate = match kind {
            ClassifierKind::Perceptron => 0.1,
            _ => 0.01,
        };
        Hyper {
            learning_rate,
            epochs: 20,
            l2: 1e-4,
            alpha: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Params {
    Linear {
        weights: Vec<Vec<f64>>,
        bias: Vec<f64>,
    },
    NaiveBayes {
        log_prior: Vec<f64>,
        log_likelihood: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub kind: ClassifierKind,
    /// Sorted class labels.
    pub classes: Vec<String>,
    pub class_counts: Vec<usize>,
    pub dim: usize,
    pub params: Params,
    pub hyper: Hyper,
    /// Perceptron only: misclassified training examples per epoch, summed
    /// over the one-vs-rest problems.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub epoch_errors: Vec<usize>,
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^t)` without overflow.
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// Per-example L2-regularized logistic loss for a ±1 label.
pub fn logistic_loss(w: &[f64], b: f64, x: &SparseVec, y: f64, l2: f64) -> f64 {
    let z = dot(w, x) + b;
    softplus(-y * z) + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>()
}

/// Analytic gradient of [`logistic_loss`] with respect to `(w, b)`.
pub fn logistic_gradient(w: &[f64], b: f64, x: &SparseVec, y: f64, l2: f64) -> (Vec<f64>, f64) {
    let z = dot(w, x) + b;
    let g = -y * sigmoid(-y * z);
    let mut grad: Vec<f64> = w.iter().map(|v| l2 * v).collect();
    for &(i, v) in x {
        grad[i] += g * v;
    }
    (grad, g)
}

/// Weight vector stored as `scale * v` so that L2 shrinkage is O(1).
struct ScaledWeights {
    v: Vec<f64>,
    scale: f64,
}

impl ScaledWeights {
    fn new(dim: usize) -> Self {
        ScaledWeights {
            v: vec![0.0; dim],
            scale: 1.0,
        }
    }

    fn dot(&self, x: &SparseVec) -> f64 {
        self.scale * dot(&self.v, x)
    }

    fn shrink(&mut self, factor: f64) {
        if factor <= 0.0 {
            self.v.iter_mut().for_each(|v| *v = 0.0);
            self.scale = 1.0;
            return;
        }
        self.scale *= factor;
        if self.scale < 1e-9 {
            self.v.iter_mut().for_each(|v| *v *= self.scale);
            self.scale = 1.0;
        }
    }

    fn add(&mut self, x: &SparseVec, step: f64) {
        for &(i, v) in x {
            self.v[i] += step * v / self.scale;
        }
    }

    fn into_dense(self) -> Vec<f64> {
        self.v.into_iter().map(|v| v * self.scale).collect()
    }
}

fn epoch_orders(n: usize, epochs: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..epochs)
        .map(|_| {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            order
        })
        .collect()
}

#[derive(Clone, Copy)]
enum Loss {
    Logistic,
    Hinge,
}

fn train_sgd(
    x: &[SparseVec],
    positive: &[bool],
    dim: usize,
    hyper: &Hyper,
    orders: &[Vec<usize>],
    loss: Loss,
) -> (Vec<f64>, f64) {
    let mut w = ScaledWeights::new(dim);
    let mut b = 0.0;
    let eta = hyper.learning_rate;
    for order in orders {
        for &j in order {
            let y = if positive[j] { 1.0 } else { -1.0 };
            let z = w.dot(&x[j]) + b;
            let g = match loss {
                Loss::Logistic => -y * sigmoid(-y * z),
                Loss::Hinge if y * z < 1.0 => -y,
                Loss::Hinge => 0.0,
            };
            w.shrink(1.0 - eta * hyper.l2);
            if g != 0.0 {
                w.add(&x[j], -eta * g);
                b -= eta * g;
            }
        }
    }
    (w.into_dense(), b)
}

fn train_perceptron(
    x: &[SparseVec],
    positive: &[bool],
    dim: usize,
    hyper: &Hyper,
    orders: &[Vec<usize>],
    errors: &mut [usize],
) -> (Vec<f64>, f64) {
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let r = hyper.learning_rate;
    for (epoch, order) in orders.iter().enumerate() {
        let mut mistakes = 0;
        for &j in order {
            let y = if positive[j] { 1.0 } else { 0.0 };
            let predicted = if dot(&w, &x[j]) + b > 0.0 { 1.0 } else { 0.0 };
            let delta = r * (y - predicted);
            if delta != 0.0 {
                mistakes += 1;
                for &(i, v) in &x[j] {
                    w[i] += delta * v;
                }
                b += delta;
            }
        }
        errors[epoch] += mistakes;
        if mistakes == 0 {
            // converged: every later epoch would be a no-op
            break;
        }
    }
    (w, b)
}

fn check_dims(x: &[SparseVec], dim: usize) -> Result<()> {
    for (row, v) in x.iter().enumerate() {
        if let Some(&(i, _)) = v.iter().find(|(i, _)| *i >= dim) {
            return Err(Error::Param(format!("row {row}: feature {i} outside dimension {dim}")));
        }
    }
    Ok(())
}

/// Train a classifier on sparse rows `x` with labels `y`.
pub fn train_classifier(
    kind: ClassifierKind,
    x: &[SparseVec],
    y: &[String],
    dim: usize,
    hyper: &Hyper,
) -> Result<LinearModel> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::Param(format!(
            "need matching non-empty rows and labels, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    check_dims(x, dim)?;
    let mut classes: Vec<String> = y.to_vec();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::Degenerate(format!(
            "only one class ({}) in training data",
            classes[0]
        )));
    }
    let label_ids: Vec<usize> = y
        .iter()
        .map(|l| classes.binary_search(l).expect("label is a class"))
        .collect();
    let mut class_counts = vec![0usize; classes.len()];
    for &c in &label_ids {
        class_counts[c] += 1;
    }

    let mut epoch_errors = Vec::new();
    let params = match kind {
        ClassifierKind::MultinomialNb => {
            let n = x.len() as f64;
            let mut log_prior = Vec::with_capacity(classes.len());
            let mut log_likelihood = Vec::with_capacity(classes.len());
            for (c, &count) in class_counts.iter().enumerate() {
                let mut feature = vec![0.0; dim];
                for (row, &id) in x.iter().zip(&label_ids) {
                    if id == c {
                        for &(i, v) in row {
                            feature[i] += v;
                        }
                    }
                }
                let total: f64 = feature.iter().sum();
                let denom = total + hyper.alpha * dim as f64;
                log_prior.push((count as f64 / n).ln());
                log_likelihood.push(feature.iter().map(|f| ((f + hyper.alpha) / denom).ln()).collect());
            }
            Params::NaiveBayes {
                log_prior,
                log_likelihood,
            }
        }
        _ => {
            let orders = epoch_orders(x.len(), hyper.epochs, hyper.seed);
            if kind == ClassifierKind::Perceptron {
                epoch_errors = vec![0; hyper.epochs];
            }
            let mut weights = Vec::with_capacity(classes.len());
            let mut bias = Vec::with_capacity(classes.len());
            for c in 0..classes.len() {
                let positive: Vec<bool> = label_ids.iter().map(|&id| id == c).collect();
                let (w, b) = match kind {
                    ClassifierKind::Perceptron => {
                        train_perceptron(x, &positive, dim, hyper, &orders, &mut epoch_errors)
                    }
                    ClassifierKind::LogisticSgd => train_sgd(x, &positive, dim, hyper, &orders, Loss::Logistic),
                    ClassifierKind::LinearSvmSgd => train_sgd(x, &positive, dim, hyper, &orders, Loss::Hinge),
                    ClassifierKind::MultinomialNb => unreachable!(),
                };
                weights.push(w);
                bias.push(b);
            }
            Params::Linear { weights, bias }
        }
    };

    Ok(LinearModel {
        kind,
        classes,
        class_counts,
        dim,
        params,
        hyper: *hyper,
        epoch_errors,
    })
}

impl LinearModel {
    /// Decision values (linear kinds) or joint log-probabilities (naive
    /// Bayes), one per class.
    pub fn predict_scores(&self, x: &SparseVec) -> Result<Vec<f64>> {
        check_dims(std::slice::from_ref(x), self.dim)?;
        Ok(match &self.params {
            Params::Linear { weights, bias } => weights.iter().zip(bias).map(|(w, b)| dot(w, x) + b).collect(),
            Params::NaiveBayes {
                log_prior,
                log_likelihood,
            } => log_prior
                .iter()
                .zip(log_likelihood)
                .map(|(p, ll)| p + dot(ll, x))
                .collect(),
        })
    }

    /// Highest-scoring class; ties go to the more frequent training class,
    /// then to the lexicographically smaller label.
    pub fn predict(&self, x: &SparseVec) -> Result<&str> {
        let scores = self.predict_scores(x)?;
        let best = (0..self.classes.len())
            .max_by(|&a, &b| {
                scores[a]
                    .partial_cmp(&scores[b])
                    .unwrap_or(Ordering::Equal)
                    .then_with(|| self.class_counts[a].cmp(&self.class_counts[b]))
                    .then_with(|| self.classes[b].cmp(&self.classes[a]))
            })
            .expect("at least two classes");
        Ok(&self.classes[best])
    }

    /// Naive Bayes class posteriors (softmax of the joint log-probabilities).
    pub fn posteriors(&self, x: &SparseVec) -> Result<Vec<f64>> {
        let scores = self.predict_scores(x)?;
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let z: f64 = exp.iter().sum();
        Ok(exp.into_iter().map(|e| e / z).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn perceptron_separates_two_points() {
        let x = vec![vec![(0, 1.0)], vec![(1, 1.0)]];
        let y = labels(&["A", "B"]);
        let m = train_classifier(
            ClassifierKind::Perceptron,
            &x,
            &y,
            2,
            &Hyper::defaults_for(ClassifierKind::Perceptron),
        )
        .unwrap();
        assert_eq!(m.predict(&x[0]).unwrap(), "A");
        assert_eq!(m.predict(&x[1]).unwrap(), "B");
        let last = m.epoch_errors.iter().position(|&e| e == 0).expect("converged");
        assert!(last < 10);
        assert!(m.epoch_errors[..=last].windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn naive_bayes_laplace() {
        // three "x" documents for A, three "y" documents for B
        let x = vec![vec![(0, 1.0)]; 3]
            .into_iter()
            .chain(vec![vec![(1, 1.0)]; 3])
            .collect::<Vec<_>>();
        let y = labels(&["A", "A", "A", "B", "B", "B"]);
        let m = train_classifier(
            ClassifierKind::MultinomialNb,
            &x,
            &y,
            2,
            &Hyper::defaults_for(ClassifierKind::MultinomialNb),
        )
        .unwrap();
        let Params::NaiveBayes {
            log_likelihood,
            log_prior,
        } = &m.params
        else {
            panic!()
        };
        assert!((log_likelihood[0][0].exp() - 0.8).abs() < 1e-12);
        assert!((log_prior[0].exp() - 0.5).abs() < 1e-12);
        let p = m.posteriors(&vec![(0, 1.0), (1, 0.5)]).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn majority_wins_on_identical_features() {
        let x = vec![vec![(0, 1.0)]; 10];
        let mut y = labels(&["A"; 6]);
        y.extend(labels(&["B"; 4]));
        for kind in [ClassifierKind::MultinomialNb, ClassifierKind::LogisticSgd] {
            let m = train_classifier(kind, &x, &y, 1, &Hyper::defaults_for(kind)).unwrap();
            assert_eq!(m.predict(&x[0]).unwrap(), "A", "{kind:?}");
        }
        let m = train_classifier(
            ClassifierKind::LogisticSgd,
            &x,
            &y,
            1,
            &Hyper::defaults_for(ClassifierKind::LogisticSgd),
        )
        .unwrap();
        assert_eq!(m.predict(&vec![]).unwrap(), "A");
    }

    #[test]
    fn single_class_is_degenerate() {
        let x = vec![vec![(0, 1.0)]; 2];
        let r = train_classifier(
            ClassifierKind::LogisticSgd,
            &x,
            &labels(&["A", "A"]),
            1,
            &Hyper::defaults_for(ClassifierKind::LogisticSgd),
        );
        assert!(matches!(r, Err(Error::Degenerate(_))));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let x = vec![vec![(0, 1.0)], vec![(1, 1.0)]];
        let m = train_classifier(
            ClassifierKind::LinearSvmSgd,
            &x,
            &labels(&["A", "B"]),
            2,
            &Hyper::defaults_for(ClassifierKind::LinearSvmSgd),
        )
        .unwrap();
        assert!(matches!(m.predict(&vec![(5, 1.0)]), Err(Error::Param(_))));
    }

    #[test]
    fn same_seed_same_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<SparseVec> = (0..50)
            .map(|_| (0..5).map(|i| (i, rng.random::<f64>())).collect())
            .collect();
        let y: Vec<String> = (0..50).map(|i| ["A", "B", "C"][i % 3].to_string()).collect();
        for kind in [
            ClassifierKind::Perceptron,
            ClassifierKind::LogisticSgd,
            ClassifierKind::LinearSvmSgd,
        ] {
            let h = Hyper::defaults_for(kind);
            let a = train_classifier(kind, &x, &y, 5, &h).unwrap();
            let b = train_classifier(kind, &x, &y, 5, &h).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn predict_agrees_with_score_argmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x: Vec<SparseVec> = (0..60)
            .map(|_| (0..4).map(|i| (i, rng.random::<f64>())).collect())
            .collect();
        let y: Vec<String> = x
            .iter()
            .map(|r| if r[0].1 > r[1].1 { "A" } else { "B" }.to_string())
            .collect();
        for kind in [
            ClassifierKind::Perceptron,
            ClassifierKind::LogisticSgd,
            ClassifierKind::LinearSvmSgd,
            ClassifierKind::MultinomialNb,
        ] {
            let m = train_classifier(kind, &x, &y, 4, &Hyper::defaults_for(kind)).unwrap();
            for _ in 0..250 {
                let q: SparseVec = (0..4).map(|i| (i, rng.random::<f64>())).collect();
                let s = m.predict_scores(&q).unwrap();
                let best = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let p = m.predict(&q).unwrap();
                let idx = m.classes.iter().position(|c| c == p).unwrap();
                assert_eq!(s[idx], best);
            }
        }
    }
}
