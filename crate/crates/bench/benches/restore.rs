use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion, Throughput};

use diacritix::classify::{ClassifierKind, Hyper, WordkeyClassifier};
use diacritix::datasetgen::{generate, GenParams};
use diacritix::embed::{build_cowords, enhance, EmbeddingRestorer, Scheme};
use diacritix::ngram::{dominant_forms, NGramModel};
use diacritix::pipeline::{Pipeline, Restorer};
use diacritix::Corpus;
use diacritix_bench::{fixture, vectors};

fn corpus(c: &mut Criterion) {
    let f = fixture(50_000);
    let mut g = c.benchmark_group("corpus");
    g.throughput(Throughput::Bytes(f.text.len() as u64));
    g.bench_function("tokenize", |b| b.iter(|| Corpus::from_text(black_box(&f.text), true)));
    g.bench_function("strip", |b| b.iter(|| black_box(&f.corpus).stripped()));
    g.bench_function("generate", |b| {
        b.iter(|| generate(black_box(&f.corpus), &GenParams::default()))
    });
    g.finish();
}

fn ngram(c: &mut Criterion) {
    let f = fixture(50_000);
    let stripped = f.corpus.stripped();
    let mut g = c.benchmark_group("ngram");
    g.sample_size(20);
    g.bench_function("train_5", |b| {
        b.iter(|| NGramModel::train(black_box(&f.corpus), 5, &f.index, true))
    });
    let model = NGramModel::train(&f.corpus, 5, &f.index, true).unwrap();
    let pipeline = Pipeline::new(&f.corpus, &f.sets, true, Restorer::Ngram { n: 5, model });
    g.throughput(Throughput::Elements(stripped.token_count() as u64));
    g.bench_function("restore_text", |b| {
        b.iter(|| pipeline.restore_text(black_box(&stripped)))
    });
    g.finish();
}

fn classifier(c: &mut Criterion) {
    let f = fixture(50_000);
    let set = f.sets.iter().max_by_key(|s| s.instances.len()).unwrap();
    let hyper = Hyper::defaults_for(ClassifierKind::LogisticSgd);
    let mut g = c.benchmark_group("classifier");
    g.sample_size(20);
    g.throughput(Throughput::Elements(set.instances.len() as u64));
    g.bench_function("tfidf_logistic_train", |b| {
        b.iter(|| WordkeyClassifier::train(&set.instances, ClassifierKind::LogisticSgd, 9, &hyper))
    });
    let clf = WordkeyClassifier::train(&set.instances, ClassifierKind::LogisticSgd, 9, &hyper).unwrap();
    g.bench_function("predict", |b| {
        b.iter(|| {
            set.instances
                .iter()
                .map(|i| clf.predict(i).unwrap().len())
                .sum::<usize>()
        })
    });
    g.finish();
}

fn embedding(c: &mut Criterion) {
    let f = fixture(20_000);
    let model = vectors(&f.corpus, 100);
    let cowords = build_cowords(&f.corpus, &f.sets, 50, None, true).unwrap();
    let mut g = c.benchmark_group("embedding");
    g.sample_size(20);
    g.bench_function("enhance_tweak1", |b| {
        b.iter(|| enhance(&model, &cowords, Scheme::Tweak1, false))
    });
    let restorer = EmbeddingRestorer {
        scheme: Scheme::Tweak1,
        window: Some(11),
        cowords,
        context_forms: dominant_forms(&f.corpus, true, &f.index, |_| true),
    };
    let instances: Vec<_> = f
        .sets
        .iter()
        .flat_map(|s| s.instances.iter().map(move |i| (s, i)))
        .collect();
    g.throughput(Throughput::Elements(instances.len() as u64));
    g.bench_function("restore_instances", |b| {
        b.iter(|| {
            instances
                .iter()
                .filter_map(|(s, i)| restorer.restore(&model, &i.tokens, i.target, &s.variants).ok())
                .count()
        })
    });
    g.finish();
}

criterion_group!(benches, corpus, ngram, classifier, embedding);
criterion_main!(benches);
