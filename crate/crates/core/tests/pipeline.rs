use std::collections::HashSet;

use skilltwin_core::bench::synth::{generate, SynthConfig};
use skilltwin_core::bench::{generate_benchmark, BenchCounts, GenerateOptions, HardBand};
use skilltwin_core::graph::export::read_edges_jsonl;
use skilltwin_core::graph::detect_with_stats;
use skilltwin_core::pipeline::{build_index, run_pipeline, train_model, TrainingData, EDGES_FILE, INDEX_FILE};
use skilltwin_core::{Corpus, RunConfig, SkillIndex};

fn corpus(n: usize, seed: u64) -> (Corpus, Vec<(String, String)>) {
    let synth = generate(&SynthConfig { n_skills: n, seed, ..SynthConfig::default() }).unwrap();
    let forks = synth.fork_pairs();
    (Corpus::from_records(synth.records).unwrap(), forks)
}

fn training(seed: u64) -> (Corpus, Vec<skilltwin_core::LabeledPair>) {
    let synth = generate(&SynthConfig { n_skills: 60, seed, fork_rate: 0.0, duplicate_rate: 0.0, ..SynthConfig::default() }).unwrap();
    let source = Corpus::from_records(synth.records).unwrap();
    let options = GenerateOptions {
        counts: BenchCounts::new(8, 8, 16, 12, 20, 30),
        seed,
        band: HardBand::default(),
        index: Default::default(),
    };
    let bench = generate_benchmark(&source, &[], &options).unwrap();
    (Corpus::from_records(bench.records).unwrap(), bench.pairs)
}

#[test]
fn detection_is_independent_of_thread_count() {
    let (corpus, _) = corpus(150, 4);
    let (train_corpus, pairs) = training(8);
    let config = RunConfig { d: 64, ..RunConfig::default() };
    let model = train_model(TrainingData { corpus: &train_corpus, pairs: &pairs }, &config).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            let index = build_index(&corpus, &config).unwrap();
            detect_with_stats(&index, &model, &config.detect_options()).unwrap()
        })
    };
    let (one, stats_one) = run(1);
    let (four, stats_four) = run(4);
    assert_eq!(one.edges(), four.edges());
    assert_eq!(stats_one, stats_four);
}

#[test]
fn pipeline_recovers_planted_forks() {
    let (corpus, forks) = corpus(200, 6);
    let (train_corpus, pairs) = training(2);
    let dir = tempfile::tempdir().unwrap();
    let run = run_pipeline(&corpus, TrainingData { corpus: &train_corpus, pairs: &pairs }, &RunConfig::default(), dir.path()).unwrap();

    let found: HashSet<(String, String)> = run.graph.edges().iter().map(|e| (e.id_a.clone(), e.id_b.clone())).collect();
    let recovered = forks
        .iter()
        .filter(|(a, b)| found.contains(&(a.min(b).clone(), a.max(b).clone())))
        .count();
    assert!(recovered * 10 >= forks.len() * 9, "{recovered} of {} forks", forks.len());
    assert!(run.report.inflation_ratio > 1.0);

    // Written artifacts reload to the in-memory results.
    let edges = read_edges_jsonl(&dir.path().join(EDGES_FILE)).unwrap();
    assert_eq!(edges.len(), run.graph.edges().len());
    let index = SkillIndex::load(&dir.path().join(INDEX_FILE)).unwrap();
    assert_eq!(index.ids, run.index.ids);
    assert_eq!(index.nl.cosine(0, 1), run.index.nl.cosine(0, 1));
}

#[test]
fn invalid_config_is_rejected_before_any_output() {
    let (corpus, _) = corpus(20, 1);
    let (train_corpus, pairs) = training(3);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let config = RunConfig { theta: 1.0, ..RunConfig::default() };
    assert!(run_pipeline(&corpus, TrainingData { corpus: &train_corpus, pairs: &pairs }, &config, &out).is_err());
    assert!(!out.exists());
}
