//! Benchmark generation, baselines and detection metrics.

pub mod ablate;
pub mod baseline;
pub mod generate;
pub mod metrics;
pub mod minhash;
pub mod mutate;
pub mod synth;

pub use ablate::{ablate, AblationRow};
pub use baseline::{fusion_scores, run_baseline, BaselineKind};
pub use generate::{generate_benchmark, BenchCounts, Benchmark, GenerateOptions, HardBand};
pub use metrics::{evaluate, render_table, MetricsReport};
pub use mutate::{mutate, Mutant, MutationOp, Skip};

use crate::corpus::Corpus;
use crate::encoder::SkillIndex;
use crate::error::Result;
use crate::fusion::{LabeledPair, ThresholdMode, TrainOptions};

pub const FUSION: &str = "fusion";

/// Evaluates the fusion model and every baseline on one benchmark, each at its
/// own grid-searched threshold.
pub fn compare_methods(
    pairs: &[LabeledPair],
    index: &SkillIndex,
    corpus: &Corpus,
    seed: u64,
    grid_step: f64,
) -> Result<Vec<(String, MetricsReport)>> {
    let mode = ThresholdMode::GridSearch(grid_step);
    let mut rows = Vec::new();
    let fused = fusion_scores(pairs, index, seed, &TrainOptions::default())?;
    rows.push((FUSION.to_string(), evaluate(&fused, pairs, mode)?));
    for kind in BaselineKind::ALL {
        let scores = run_baseline(kind, pairs, index, corpus, seed)?;
        rows.push((kind.name().to_string(), evaluate(&scores, pairs, mode)?));
    }
    Ok(rows)
}
