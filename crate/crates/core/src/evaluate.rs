//! Cross-validation, confusion matrices and the metrics derived from them.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{ClassifierKind, Hyper, WordkeyClassifier};
use crate::corpus::{normalize, strip_diacritics, Corpus};
use crate::datasetgen::{AmbiguousSet, Instance};
use crate::embed::{EmbeddingModel, EmbeddingRestorer};
use crate::error::{Error, Result};
use crate::ngram::{NGramModel, VariantIndex};

pub const DEFAULT_FOLDS: usize = 10;

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub cells: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<String>) -> Self {
        let n = classes.len();
        ConfusionMatrix {
            classes,
            cells: vec![vec![0; n]; n],
        }
    }

    fn class_id(&mut self, label: &str) -> usize {
        if let Some(i) = self.classes.iter().position(|c| c == label) {
            return i;
        }
        self.classes.push(label.to_owned());
        for row in &mut self.cells {
            row.push(0);
        }
        self.cells.push(vec![0; self.classes.len()]);
        self.classes.len() - 1
    }

    pub fn add(&mut self, truth: &str, predicted: &str) {
        let t = self.class_id(truth);
        let p = self.class_id(predicted);
        self.cells[t][p] += 1;
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (i, t) in other.classes.iter().enumerate() {
            for (j, p) in other.classes.iter().enumerate() {
                let n = other.cells[i][j];
                if n > 0 {
                    let (ti, pj) = (self.class_id(t), self.class_id(p));
                    self.cells[ti][pj] += n;
                }
            }
        }
    }

    pub fn total(&self) -> usize {
        self.cells.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        (0..self.classes.len()).map(|i| self.cells[i][i]).sum()
    }

    pub fn row_total(&self, i: usize) -> usize {
        self.cells[i].iter().sum()
    }

    pub fn column_total(&self, j: usize) -> usize {
        self.cells.iter().map(|r| r[j]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub per_class: Vec<ClassMetrics>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Accuracy plus one-vs-rest precision, recall and F1 per class and their
/// unweighted means. Undefined ratios count as zero.
pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyMatrix);
    }
    let per_class: Vec<ClassMetrics> = (0..cm.classes.len())
        .map(|i| {
            let tp = cm.cells[i][i];
            let precision = ratio(tp, cm.column_total(i));
            let recall = ratio(tp, cm.row_total(i));
            ClassMetrics {
                class: cm.classes[i].clone(),
                precision,
                recall,
                f1: f1(precision, recall),
                support: cm.row_total(i),
            }
        })
        .collect();
    let n = per_class.len() as f64;
    Ok(Metrics {
        accuracy: ratio(cm.correct(), total),
        macro_precision: per_class.iter().map(|c| c.precision).sum::<f64>() / n,
        macro_recall: per_class.iter().map(|c| c.recall).sum::<f64>() / n,
        macro_f1: per_class.iter().map(|c| c.f1).sum::<f64>() / n,
        per_class,
    })
}

/// Split instance indices into `k` folds with the label mix of the whole
/// set in each fold.
pub fn stratified_folds<S: AsRef<str>>(labels: &[S], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || labels.len() < k {
        return Err(Error::Folds { k, n: labels.len() });
    }
    let mut by_label: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_label.entry(l.as_ref()).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for idx in by_label.values_mut() {
        idx.shuffle(&mut rng);
        for &i in idx.iter() {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// A trained restorer for one wordkey.
pub trait Predictor {
    fn predict(&self, inst: &Instance) -> Result<String>;
}

/// Trains a [`Predictor`] on a subset of an ambiguous set.
pub trait Trainer: Sync {
    fn fit<'a>(&'a self, set: &'a AmbiguousSet, train: &[usize]) -> Result<Box<dyn Predictor + 'a>>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub test: Vec<usize>,
    pub matrix: ConfusionMatrix,
    /// Training failure; the fold was then scored with the majority label.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Instances the trained restorer could not handle, scored with the
    /// majority label instead.
    pub fallbacks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub wordkey: String,
    pub matrix: ConfusionMatrix,
    pub folds: Vec<FoldOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

fn majority_label<'a>(set: &'a AmbiguousSet, train: &[usize]) -> &'a str {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for &i in train {
        *counts.entry(set.instances[i].label.as_str()).or_default() += 1;
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(a.0)))
        .map(|(l, _)| l)
        .unwrap_or_else(|| set.variants.first().map(|(v, _)| v.as_str()).unwrap_or(""))
}

fn run_fold(trainer: &dyn Trainer, set: &AmbiguousSet, train: &[usize], test: &[usize]) -> FoldOutcome {
    let mut matrix = ConfusionMatrix::new(set.variant_names());
    let fallback = majority_label(set, train);
    let mut fallbacks = 0;
    let error = match trainer.fit(set, train) {
        Ok(model) => {
            for &i in test {
                let inst = &set.instances[i];
                let predicted = model.predict(inst).unwrap_or_else(|_| {
                    fallbacks += 1;
                    fallback.to_owned()
                });
                matrix.add(&inst.label, &predicted);
            }
            None
        }
        Err(e) => {
            for &i in test {
                matrix.add(&set.instances[i].label, fallback);
            }
            Some(e.to_string())
        }
    };
    FoldOutcome {
        test: test.to_vec(),
        matrix,
        error,
        fallbacks,
    }
}

/// k-fold cross-validation of `trainer` on one ambiguous set. The fold
/// matrices are summed into one.
pub fn crossval(trainer: &dyn Trainer, set: &AmbiguousSet, k: usize, seed: u64) -> CvOutcome {
    let labels = set.labels();
    let (folds, warning) = match stratified_folds(&labels, k, seed) {
        Ok(f) => (f, None),
        Err(e) => {
            let all: Vec<usize> = (0..labels.len()).collect();
            (vec![all], Some(format!("{e}; trained and tested on all instances")))
        }
    };
    let mut outcomes = Vec::with_capacity(folds.len());
    if warning.is_some() {
        outcomes.push(run_fold(trainer, set, &folds[0], &folds[0]));
    } else {
        for (f, test) in folds.iter().enumerate() {
            let train: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|(g, _)| *g != f)
                .flat_map(|(_, idx)| idx.iter().copied())
                .collect();
            outcomes.push(run_fold(trainer, set, &train, test));
        }
    }
    let mut matrix = ConfusionMatrix::new(set.variant_names());
    for o in &outcomes {
        matrix.merge(&o.matrix);
    }
    CvOutcome {
        wordkey: set.wordkey.clone(),
        matrix,
        folds: outcomes,
        warning,
    }
}

/// Cross-validate every set, in parallel, keeping input order.
pub fn crossval_all(trainer: &dyn Trainer, sets: &[AmbiguousSet], k: usize, seed: u64) -> Vec<CvOutcome> {
    sets.par_iter().map(|s| crossval(trainer, s, k, seed)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WordkeyScores {
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub count: usize,
}

impl WordkeyScores {
    pub fn from_metrics(m: &Metrics, count: usize) -> Self {
        WordkeyScores {
            accuracy: m.accuracy,
            macro_precision: m.macro_precision,
            macro_recall: m.macro_recall,
            macro_f1: m.macro_f1,
            count,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AggregateScores {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub per_wordkey: BTreeMap<String, WordkeyScores>,
    /// Instance-count weighted means.
    pub aggregate: AggregateScores,
    /// Plain means over wordkeys.
    pub simple_average: AggregateScores,
}

/// Combine per-wordkey scores into weighted and simple averages.
pub fn aggregate(per_wordkey: BTreeMap<String, WordkeyScores>) -> MetricReport {
    let mut weighted = AggregateScores::default();
    let mut simple = AggregateScores::default();
    let total: usize = per_wordkey.values().map(|s| s.count).sum();
    let n = per_wordkey.len();
    for s in per_wordkey.values() {
        let w = s.count as f64;
        weighted.accuracy += s.accuracy * w;
        weighted.precision += s.macro_precision * w;
        weighted.recall += s.macro_recall * w;
        weighted.f1 += s.macro_f1 * w;
        simple.accuracy += s.accuracy;
        simple.precision += s.macro_precision;
        simple.recall += s.macro_recall;
        simple.f1 += s.macro_f1;
    }
    let scale = |a: &mut AggregateScores, d: f64| {
        if d > 0.0 {
            a.accuracy /= d;
            a.precision /= d;
            a.recall /= d;
            a.f1 /= d;
        }
    };
    scale(&mut weighted, total as f64);
    scale(&mut simple, n as f64);
    MetricReport {
        per_wordkey,
        aggregate: weighted,
        simple_average: simple,
    }
}

/// One row of the per-wordkey result table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub wordkey: String,
    pub count: usize,
    pub accuracy: f64,
    /// Share of the most frequent variant.
    pub baseline: f64,
    /// `accuracy - baseline`.
    pub improvement: f64,
    /// `(baseline_error - error) / baseline_error`, 0 when the baseline is
    /// already perfect.
    pub error_reduction: f64,
}

pub fn table_row(set: &AmbiguousSet, scores: &WordkeyScores) -> TableRow {
    let baseline = ratio(set.variants.iter().map(|(_, c)| *c).max().unwrap_or(0), set.total());
    let base_err = 1.0 - baseline;
    let err = 1.0 - scores.accuracy;
    TableRow {
        wordkey: set.wordkey.clone(),
        count: scores.count,
        accuracy: scores.accuracy,
        baseline,
        improvement: scores.accuracy - baseline,
        error_reduction: if base_err > 0.0 {
            (base_err - err) / base_err
        } else {
            0.0
        },
    }
}

/// Summaries of a full cross-validation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub report: MetricReport,
    pub table: Vec<TableRow>,
    pub outcomes: Vec<CvOutcome>,
}

pub fn cv_report(sets: &[AmbiguousSet], outcomes: Vec<CvOutcome>) -> Result<CvReport> {
    let mut per = BTreeMap::new();
    let mut table = Vec::new();
    for (set, o) in sets.iter().zip(&outcomes) {
        let m = metrics(&o.matrix)?;
        let scores = WordkeyScores::from_metrics(&m, o.matrix.total());
        table.push(table_row(set, &scores));
        per.insert(set.wordkey.clone(), scores);
    }
    Ok(CvReport {
        report: aggregate(per),
        table,
        outcomes,
    })
}

impl CvReport {
    pub fn to_tsv(&self) -> String {
        let mut out =
            String::from("wordkey\tcount\taccuracy\tprecision\trecall\tf1\tbaseline\timprovement\terror_reduction\n");
        for row in &self.table {
            let s = &self.report.per_wordkey[&row.wordkey];
            out.push_str(&format!(
                "{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\n",
                row.wordkey,
                row.count,
                s.accuracy,
                s.macro_precision,
                s.macro_recall,
                s.macro_f1,
                row.baseline,
                row.improvement,
                row.error_reduction
            ));
        }
        let a = &self.report.aggregate;
        out.push_str(&format!(
            "weighted\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t\t\t\n",
            self.table.iter().map(|r| r.count).sum::<usize>(),
            a.accuracy,
            a.precision,
            a.recall,
            a.f1
        ));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TextScores {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub words: usize,
    pub incorrect: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullTextReport {
    pub scores: TextScores,
    /// Gold text against its own stripped form.
    pub baseline: TextScores,
    /// One flag per line: some word differs from the gold text.
    pub line_errors: Vec<bool>,
}

/// Accuracy and macro precision/recall/F1 over word forms, with every form
/// seen in either gold or prediction as a class.
fn text_scores(pairs: &[(String, String)]) -> TextScores {
    let mut tp: HashMap<&str, usize> = HashMap::new();
    let mut gold: HashMap<&str, usize> = HashMap::new();
    let mut pred: HashMap<&str, usize> = HashMap::new();
    let mut correct = 0;
    for (p, g) in pairs {
        *gold.entry(g).or_default() += 1;
        *pred.entry(p).or_default() += 1;
        if p == g {
            correct += 1;
            *tp.entry(g).or_default() += 1;
        }
    }
    let classes: HashSet<&str> = gold.keys().chain(pred.keys()).copied().collect();
    let (mut sp, mut sr, mut sf) = (0.0, 0.0, 0.0);
    for c in &classes {
        let t = tp.get(c).copied().unwrap_or(0);
        let p = ratio(t, pred.get(c).copied().unwrap_or(0));
        let r = ratio(t, gold.get(c).copied().unwrap_or(0));
        sp += p;
        sr += r;
        sf += f1(p, r);
    }
    let n = classes.len().max(1) as f64;
    TextScores {
        accuracy: ratio(correct, pairs.len()),
        precision: sp / n,
        recall: sr / n,
        f1: sf / n,
        words: pairs.len(),
        incorrect: pairs.len() - correct,
    }
}

/// Compare a restored text with its gold version word by word. Non-word
/// tokens are not scored; forms are compared after NFC normalization.
pub fn full_text_eval(restored: &Corpus, gold: &Corpus) -> Result<FullTextReport> {
    let lines = restored.lines.len().max(gold.lines.len());
    let mut pairs = Vec::new();
    let mut base_pairs = Vec::new();
    let mut line_errors = Vec::with_capacity(lines);
    for i in 0..lines {
        let (r, g) = match (restored.lines.get(i), gold.lines.get(i)) {
            (Some(r), Some(g)) if r.len() == g.len() => (r, g),
            (r, g) => {
                return Err(Error::Alignment {
                    line: i + 1,
                    restored: r.map_or(0, Vec::len),
                    gold: g.map_or(0, Vec::len),
                })
            }
        };
        let mut wrong = false;
        for (rt, gt) in r.iter().zip(g) {
            if !gt.is_word() {
                continue;
            }
            let gform = normalize(&gt.surface);
            let rform = normalize(&rt.surface);
            wrong |= rform != gform;
            base_pairs.push((strip_diacritics(&gform), gform.clone()));
            pairs.push((rform, gform));
        }
        line_errors.push(wrong);
    }
    Ok(FullTextReport {
        scores: text_scores(&pairs),
        baseline: text_scores(&base_pairs),
        line_errors,
    })
}

/// N-gram restorer trained, per fold, only on the lines that hold no
/// held-out instance.
pub struct NGramTrainer<'c> {
    pub corpus: &'c Corpus,
    pub index: VariantIndex,
    pub n: usize,
    pub lowercase: bool,
}

struct NGramPredictor {
    model: NGramModel,
    n: usize,
}

impl Predictor for NGramPredictor {
    fn predict(&self, inst: &Instance) -> Result<String> {
        self.model.restore_instance(inst, self.n)
    }
}

impl Trainer for NGramTrainer<'_> {
    fn fit<'a>(&'a self, set: &'a AmbiguousSet, train: &[usize]) -> Result<Box<dyn Predictor + 'a>> {
        let in_train: HashSet<usize> = train.iter().copied().collect();
        let mut held_out = HashSet::new();
        for (i, inst) in set.instances.iter().enumerate() {
            if in_train.contains(&i) {
                continue;
            }
            match inst.line {
                Some(l) => held_out.insert(l),
                None => {
                    return Err(Error::Param(format!(
                        "instance {i} of {:?} has no line number",
                        set.wordkey
                    )))
                }
            };
        }
        let model = NGramModel::train_on_lines(self.corpus, self.n, &self.index, self.lowercase, |l| {
            !held_out.contains(&l)
        })?;
        Ok(Box::new(NGramPredictor { model, n: self.n }))
    }
}

/// Per-wordkey linear classifier on sticky-window tf-idf features.
pub struct ClassifierTrainer {
    pub kind: ClassifierKind,
    pub window: usize,
    pub hyper: Hyper,
}

impl Predictor for WordkeyClassifier {
    fn predict(&self, inst: &Instance) -> Result<String> {
        WordkeyClassifier::predict(self, inst)
    }
}

impl Trainer for ClassifierTrainer {
    fn fit<'a>(&'a self, set: &'a AmbiguousSet, train: &[usize]) -> Result<Box<dyn Predictor + 'a>> {
        let insts = train.iter().map(|&i| &set.instances[i]);
        Ok(Box::new(WordkeyClassifier::train(
            insts,
            self.kind,
            self.window,
            &self.hyper,
        )?))
    }
}

/// Embedding restorer. The vectors are fixed; only the candidate
/// frequencies used as fallback come from the training folds.
pub struct EmbeddingTrainer<'m> {
    pub model: &'m EmbeddingModel,
    pub restorer: &'m EmbeddingRestorer,
}

struct EmbeddingPredictor<'a> {
    model: &'a EmbeddingModel,
    restorer: &'a EmbeddingRestorer,
    candidates: Vec<(String, usize)>,
}

impl Predictor for EmbeddingPredictor<'_> {
    fn predict(&self, inst: &Instance) -> Result<String> {
        Ok(self
            .restorer
            .restore(self.model, &inst.tokens, inst.target, &self.candidates)?
            .variant)
    }
}

impl Trainer for EmbeddingTrainer<'_> {
    fn fit<'a>(&'a self, set: &'a AmbiguousSet, train: &[usize]) -> Result<Box<dyn Predictor + 'a>> {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for &i in train {
            *counts.entry(set.instances[i].label.as_str()).or_default() += 1;
        }
        let candidates = set
            .variants
            .iter()
            .map(|(v, _)| (v.clone(), counts.get(v.as_str()).copied().unwrap_or(0)))
            .collect();
        Ok(Box::new(EmbeddingPredictor {
            model: self.model,
            restorer: self.restorer,
            candidates,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cm(classes: &[&str], cells: Vec<Vec<usize>>) -> ConfusionMatrix {
        ConfusionMatrix {
            classes: classes.iter().map(|s| s.to_string()).collect(),
            cells,
        }
    }

    #[test]
    fn diagonal_is_perfect() {
        let m = metrics(&cm(&["a", "b", "c"], vec![vec![3, 0, 0], vec![0, 5, 0], vec![0, 0, 1]])).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.macro_precision, 1.0);
        assert_eq!(m.macro_recall, 1.0);
        assert_eq!(m.macro_f1, 1.0);
    }

    #[test]
    fn three_class_by_hand() {
        // rows true a, b, c
        let m = metrics(&cm(&["a", "b", "c"], vec![vec![4, 1, 0], vec![2, 2, 1], vec![0, 0, 0]])).unwrap();
        assert!((m.accuracy - 6.0 / 10.0).abs() < 1e-12);
        // precision a = 4/6, b = 2/3, c = 0/1 ; recall a = 4/5, b = 2/5, c = 0/0 → 0
        assert!((m.macro_precision - (4.0 / 6.0 + 2.0 / 3.0) / 3.0).abs() < 1e-12);
        assert!((m.macro_recall - (0.8 + 0.4) / 3.0).abs() < 1e-12);
        let fa = 2.0 * (4.0 / 6.0) * 0.8 / (4.0 / 6.0 + 0.8);
        let fb = 2.0 * (2.0 / 3.0) * 0.4 / (2.0 / 3.0 + 0.4);
        assert!((m.macro_f1 - (fa + fb) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_matrix_is_an_error() {
        assert!(matches!(metrics(&cm(&["a"], vec![vec![0]])), Err(Error::EmptyMatrix)));
    }

    #[test]
    fn folds_are_stratified() {
        let mut labels = vec!["A"; 60];
        labels.extend(vec!["B"; 40]);
        let folds = stratified_folds(&labels, 10, 7).unwrap();
        for f in &folds {
            let a = f.iter().filter(|&&i| labels[i] == "A").count();
            assert_eq!((a, f.len() - a), (6, 4));
        }
        let one = stratified_folds(&["x"; 10], 10, 0).unwrap();
        assert!(one.iter().all(|f| f.len() == 1));
        assert!(stratified_folds(&["x"; 3], 10, 0).is_err());
        assert_eq!(stratified_folds(&labels, 10, 7).unwrap(), folds);
    }

    #[test]
    fn aggregate_weights_by_count() {
        let s = |a: f64, c: usize| WordkeyScores {
            accuracy: a,
            macro_precision: a,
            macro_recall: a,
            macro_f1: a,
            count: c,
        };
        let mut per = BTreeMap::new();
        per.insert("x".to_string(), s(0.5, 100));
        per.insert("y".to_string(), s(0.9, 300));
        let r = aggregate(per);
        assert!((r.aggregate.accuracy - 0.8).abs() < 1e-12);
        assert!((r.simple_average.accuracy - 0.7).abs() < 1e-12);

        let mut single = BTreeMap::new();
        single.insert("x".to_string(), s(0.3, 7));
        let r = aggregate(single);
        assert!((r.aggregate.f1 - 0.3).abs() < 1e-12);
    }

    #[test]
    fn encoding_variants_match() {
        let gold = Corpus::from_text("o bu\u{323}\u{301} .", true);
        let restored = Corpus::from_text("o bu\u{301}\u{323} .", true);
        let r = full_text_eval(&restored, &gold).unwrap();
        assert_eq!(r.scores.accuracy, 1.0);
        assert_eq!(r.scores.words, 2);
    }

    #[test]
    fn stripped_baseline_counts_unmarked_words() {
        let gold = Corpus::from_text("ákwà a b\nọ c d", true);
        let r = full_text_eval(&gold.stripped(), &gold).unwrap();
        assert!((r.scores.accuracy - 4.0 / 6.0).abs() < 1e-12);
        assert!((r.baseline.accuracy - 4.0 / 6.0).abs() < 1e-12);
        assert_eq!(r.line_errors, vec![true, true]);
        let same = full_text_eval(&gold, &gold).unwrap();
        assert_eq!(same.scores.accuracy, 1.0);
        assert_eq!(same.scores.f1, 1.0);
    }

    #[test]
    fn misaligned_lines_are_reported() {
        let gold = Corpus::from_text("a b\nc d", true);
        let restored = Corpus::from_text("a b\nc", true);
        assert!(matches!(
            full_text_eval(&restored, &gold),
            Err(Error::Alignment {
                line: 2,
                restored: 1,
                gold: 2
            })
        ));
    }

    struct Oracle;
    struct Constant(&'static str);
    struct Broken;

    impl Predictor for Oracle {
        fn predict(&self, inst: &Instance) -> Result<String> {
            Ok(inst.label.clone())
        }
    }

    impl Trainer for Oracle {
        fn fit<'a>(&'a self, _: &'a AmbiguousSet, _: &[usize]) -> Result<Box<dyn Predictor + 'a>> {
            Ok(Box::new(Oracle))
        }
    }

    impl Predictor for Constant {
        fn predict(&self, _: &Instance) -> Result<String> {
            Ok(self.0.to_owned())
        }
    }

    impl Trainer for Constant {
        fn fit<'a>(&'a self, _: &'a AmbiguousSet, _: &[usize]) -> Result<Box<dyn Predictor + 'a>> {
            Ok(Box::new(Constant(self.0)))
        }
    }

    impl Trainer for Broken {
        fn fit<'a>(&'a self, _: &'a AmbiguousSet, _: &[usize]) -> Result<Box<dyn Predictor + 'a>> {
            Err(Error::Degenerate("nothing to learn".into()))
        }
    }

    fn binary_set(a: usize, b: usize) -> AmbiguousSet {
        let inst = |label: &str| Instance {
            tokens: vec!["x".into(), "akwa".into()],
            target: 1,
            label: label.into(),
            line: None,
        };
        let mut instances: Vec<Instance> = (0..a).map(|_| inst("ákwà")).collect();
        instances.extend((0..b).map(|_| inst("àkwá")));
        AmbiguousSet {
            wordkey: "akwa".into(),
            variants: vec![("ákwà".into(), a), ("àkwá".into(), b)],
            instances,
        }
    }

    #[test]
    fn oracle_and_majority() {
        let set = binary_set(60, 40);
        let o = crossval(&Oracle, &set, 10, 1);
        let m = metrics(&o.matrix).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(o.matrix.total(), 100);
        assert_eq!(o.folds.len(), 10);

        let c = crossval(&Constant("ákwà"), &set, 10, 1);
        assert!((metrics(&c.matrix).unwrap().accuracy - 0.6).abs() < 1e-12);
        assert_eq!(c.matrix.row_total(0), 60);
        assert_eq!(crossval(&Oracle, &set, 10, 1), o);
    }

    #[test]
    fn failed_folds_use_the_majority() {
        let o = crossval(&Broken, &binary_set(7, 3), 5, 0);
        assert!(o.folds.iter().all(|f| f.error.is_some()));
        assert!((metrics(&o.matrix).unwrap().accuracy - 0.7).abs() < 1e-12);
    }

    #[test]
    fn small_sets_train_on_everything() {
        let o = crossval(&Oracle, &binary_set(3, 2), 10, 0);
        assert!(o.warning.is_some());
        assert_eq!(o.matrix.total(), 5);
    }

    #[test]
    fn ngram_folds_hold_out_lines() {
        let mut text = String::new();
        for i in 0..20 {
            if i % 2 == 0 {
                text.push_str("nke ákwà\n");
            } else {
                text.push_str("ọ́ àkwá\n");
            }
        }
        let corpus = Corpus::from_text(&text, true);
        let sets = crate::datasetgen::generate(&corpus, &Default::default()).unwrap();
        assert_eq!(sets.len(), 1);
        let trainer = NGramTrainer {
            corpus: &corpus,
            index: crate::ngram::variant_index_from_sets(&sets),
            n: 2,
            lowercase: true,
        };
        let o = crossval(&trainer, &sets[0], 10, 3);
        assert_eq!(metrics(&o.matrix).unwrap().accuracy, 1.0);
        let uni = NGramTrainer { n: 1, ..trainer };
        let o = crossval(&uni, &sets[0], 10, 3);
        assert!((metrics(&o.matrix).unwrap().accuracy - 0.5).abs() < 1e-12);
    }

    #[test]
    fn report_columns() {
        let set = binary_set(60, 40);
        let r = cv_report(
            std::slice::from_ref(&set),
            vec![crossval(&Constant("ákwà"), &set, 10, 0)],
        )
        .unwrap();
        let row = &r.table[0];
        assert!((row.baseline - 0.6).abs() < 1e-12);
        assert!(row.improvement.abs() < 1e-12);
        assert!(row.error_reduction.abs() < 1e-12);
        let r = cv_report(std::slice::from_ref(&set), vec![crossval(&Oracle, &set, 10, 0)]).unwrap();
        assert!((r.table[0].error_reduction - 1.0).abs() < 1e-12);
        assert!(r.to_tsv().lines().nth(1).unwrap().starts_with("akwa\t100\t1.0000"));
    }

    fn matrix_strategy() -> impl Strategy<Value = Vec<Vec<usize>>> {
        (2usize..5).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(0usize..50, n), n))
    }

    proptest! {
        #[test]
        fn metrics_are_permutation_invariant(cells in matrix_strategy(), rot in 0usize..4) {
            prop_assume!(cells.iter().flatten().sum::<usize>() > 0);
            let n = cells.len();
            let classes: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
            let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
            let a = ConfusionMatrix { classes: classes.clone(), cells: cells.clone() };
            let b = ConfusionMatrix {
                classes: perm.iter().map(|&i| classes[i].clone()).collect(),
                cells: perm.iter().map(|&i| perm.iter().map(|&j| cells[i][j]).collect()).collect(),
            };
            let (ma, mb) = (metrics(&a).unwrap(), metrics(&b).unwrap());
            prop_assert!((ma.accuracy - mb.accuracy).abs() < 1e-12);
            prop_assert!((ma.macro_precision - mb.macro_precision).abs() < 1e-12);
            prop_assert!((ma.macro_recall - mb.macro_recall).abs() < 1e-12);
            prop_assert!((ma.macro_f1 - mb.macro_f1).abs() < 1e-12);
            for v in [ma.accuracy, ma.macro_precision, ma.macro_recall, ma.macro_f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }

        #[test]
        fn binary_macro_recall_is_balanced_accuracy(a in 0usize..100, b in 0usize..100, c in 0usize..100, d in 0usize..100) {
            prop_assume!(a + b > 0 && c + d > 0);
            let m = metrics(&cm(&["x", "y"], vec![vec![a, b], vec![c, d]])).unwrap();
            let balanced = (a as f64 / (a + b) as f64 + d as f64 / (c + d) as f64) / 2.0;
            prop_assert!((m.macro_recall - balanced).abs() < 1e-12);
        }

        #[test]
        fn weighted_mean_is_bounded(scores in prop::collection::vec((0.0f64..=1.0, 1usize..1000), 1..10)) {
            let per: BTreeMap<String, WordkeyScores> = scores.iter().enumerate().map(|(i, &(a, c))| {
                (format!("w{i}"), WordkeyScores { accuracy: a, macro_precision: a, macro_recall: a, macro_f1: a, count: c })
            }).collect();
            let lo = scores.iter().map(|s| s.0).fold(1.0, f64::min);
            let hi = scores.iter().map(|s| s.0).fold(0.0, f64::max);
            let r = aggregate(per.clone());
            prop_assert!(r.aggregate.accuracy >= lo - 1e-12 && r.aggregate.accuracy <= hi + 1e-12);
            let mut reversed: Vec<_> = per.into_iter().collect();
            reversed.reverse();
            let r2 = aggregate(reversed.into_iter().collect());
            prop_assert!((r.aggregate.accuracy - r2.aggregate.accuracy).abs() < 1e-12);
        }
    }
}
