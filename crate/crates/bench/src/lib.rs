//! Shared fixtures for the criterion benchmarks under `benches/`.

use skilltwin_core::bench::synth::{generate, SynthConfig};
use skilltwin_core::bench::{generate_benchmark, BenchCounts, GenerateOptions, HardBand};
use skilltwin_core::{Corpus, LabeledPair};

/// Synthetic corpus with forks and duplicates.
pub fn corpus(n_skills: usize, seed: u64) -> Corpus {
    let synth = generate(&SynthConfig {
        n_skills,
        seed,
        ..SynthConfig::default()
    })
    .expect("synthetic corpus");
    Corpus::from_records(synth.records).expect("corpus")
}

/// A small labelled benchmark and the corpus its ids refer to.
pub fn training(seed: u64) -> (Corpus, Vec<LabeledPair>) {
    let source = generate(&SynthConfig {
        n_skills: 80,
        seed,
        fork_rate: 0.0,
        duplicate_rate: 0.0,
        ..SynthConfig::default()
    })
    .expect("synthetic corpus");
    let options = GenerateOptions {
        counts: BenchCounts::new(10, 10, 20, 15, 25, 40),
        seed,
        band: HardBand::default(),
        index: Default::default(),
    };
    let bench = generate_benchmark(&Corpus::from_records(source.records).expect("corpus"), &[], &options).expect("benchmark");
    (Corpus::from_records(bench.records).expect("corpus"), bench.pairs)
}
