use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use skilltwin_core::bench::minhash::{MinHasher, DEFAULT_PERMUTATIONS};
use skilltwin_core::fusion::build_profile;
use skilltwin_core::graph::{candidate_pairs, detect_with_stats};
use skilltwin_core::pipeline::{build_index, parse_corpus, train_model, TrainingData};
use skilltwin_core::{classify, FusionModel, RunConfig, SkillIndex, TypeThresholds};
use skilltwin_benches::{corpus, training};

fn fixtures(n: usize) -> (skilltwin_core::Corpus, SkillIndex, FusionModel, RunConfig) {
    let config = RunConfig::default();
    let corpus = corpus(n, 1);
    let index = build_index(&corpus, &config).unwrap();
    let (train_corpus, pairs) = training(2);
    let model = train_model(TrainingData { corpus: &train_corpus, pairs: &pairs }, &config).unwrap();
    (corpus, index, model, config)
}

fn encode(c: &mut Criterion) {
    let corpus = corpus(300, 1);
    let docs = parse_corpus(&corpus);
    let config = RunConfig::default().index_config();
    let mut group = c.benchmark_group("encode");
    group.sample_size(10);
    group.bench_function("parse_300", |b| b.iter(|| parse_corpus(black_box(&corpus))));
    group.bench_function("index_300", |b| b.iter(|| SkillIndex::fit(black_box(&docs), config).unwrap()));
    group.finish();
}

fn detect(c: &mut Criterion) {
    let (_, index, model, config) = fixtures(500);
    let mut group = c.benchmark_group("detect");
    group.sample_size(10);
    let options = config.detect_options();
    group.bench_function("candidates_500", |b| b.iter(|| candidate_pairs(black_box(&index), &options.candidates)));
    group.bench_function("detect_500", |b| b.iter(|| detect_with_stats(black_box(&index), &model, &options).unwrap()));
    group.finish();
}

fn pair(c: &mut Criterion) {
    let (corpus, index, model, _) = fixtures(100);
    let thresholds = TypeThresholds::default();
    c.bench_function("profile_score_classify", |b| {
        b.iter(|| {
            let p = build_profile(&index, black_box(3), black_box(57)).unwrap();
            let fv = skilltwin_core::fusion::featurize(&p);
            (model.predict(&fv), classify(&p, &thresholds).ok())
        })
    });
    let hasher = MinHasher::new(DEFAULT_PERMUTATIONS, 0);
    let text = corpus.records()[0].raw_text.clone();
    c.bench_function("minhash_signature", |b| {
        b.iter_batched(|| text.clone(), |t| hasher.signature(&t), BatchSize::SmallInput)
    });
}

criterion_group!(benches, encode, detect, pair);
criterion_main!(benches);
