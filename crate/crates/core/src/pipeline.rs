//! End-to-end run: index, train, detect, report.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::corpus::Corpus;
use crate::encoder::SkillIndex;
use crate::error::{Error, Result};
use crate::fusion::{train, FusionModel, LabeledPair};
use crate::graph::export::{component_summary, ecosystem_csv, propagation_csv, write_edges_jsonl, write_json, write_text};
use crate::graph::superseded::DEFAULT_SUBSET_FLOOR;
use crate::graph::{
    detect_with_stats, ecosystem_report, propagate, security_scan, superseded_analysis, CloneGraph, EcosystemReport,
    FilterStats, PatternSet,
};
use crate::parser::{parse_skill, SkillDocument};

pub const INDEX_FILE: &str = "index.json";
pub const MODEL_FILE: &str = "model.json";
pub const EDGES_FILE: &str = "edges.jsonl";
pub const COMPONENTS_FILE: &str = "components.json";
pub const FILTER_FILE: &str = "filter.json";
pub const REPORT_FILE: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";
pub const SUPERSEDED_FILE: &str = "superseded.json";
pub const SECURITY_FILE: &str = "security.json";
pub const SECURITY_CSV: &str = "security.csv";

/// Every file a run writes, in write order.
pub const OUTPUT_FILES: [&str; 10] = [
    INDEX_FILE,
    MODEL_FILE,
    EDGES_FILE,
    COMPONENTS_FILE,
    FILTER_FILE,
    REPORT_FILE,
    REPORT_CSV,
    SUPERSEDED_FILE,
    SECURITY_FILE,
    SECURITY_CSV,
];

/// Labelled pairs and the corpus their ids refer to.
#[derive(Debug, Clone, Copy)]
pub struct TrainingData<'a> {
    pub corpus: &'a Corpus,
    pub pairs: &'a [LabeledPair],
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub index: SkillIndex,
    pub model: FusionModel,
    pub graph: CloneGraph,
    pub filter: FilterStats,
    pub report: EcosystemReport,
}

pub fn parse_corpus(corpus: &Corpus) -> Vec<SkillDocument> {
    corpus.records().iter().cloned().map(parse_skill).collect()
}

pub fn build_index(corpus: &Corpus, config: &RunConfig) -> Result<SkillIndex> {
    SkillIndex::fit(&parse_corpus(corpus), config.index_config())
}

/// Trains on `training`; its corpus gets its own index with the run's
/// encoder settings.
pub fn train_model(training: TrainingData<'_>, config: &RunConfig) -> Result<FusionModel> {
    let index = build_index(training.corpus, config)?;
    train(training.pairs, &index, config.train_seed(), &config.train_options())
}

/// Runs every stage and writes [`OUTPUT_FILES`] into `out_dir`. Identical
/// inputs give byte-identical files.
pub fn run_pipeline(corpus: &Corpus, training: TrainingData<'_>, config: &RunConfig, out_dir: &Path) -> Result<PipelineRun> {
    config.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let path = |name: &str| -> PathBuf { out_dir.join(name) };

    let index = build_index(corpus, config)?;
    index.save(&path(INDEX_FILE))?;

    let model = train_model(training, config)?;
    model.save(&path(MODEL_FILE))?;

    let (graph, filter) = detect_with_stats(&index, &model, &config.detect_options())?;
    write_edges_jsonl(&graph, &path(EDGES_FILE))?;
    write_json(&component_summary(&graph), &path(COMPONENTS_FILE))?;
    write_json(&filter, &path(FILTER_FILE))?;

    let report = ecosystem_report(&graph, corpus)?;
    write_json(&report, &path(REPORT_FILE))?;
    write_text(&ecosystem_csv(&report), &path(REPORT_CSV))?;
    write_json(&superseded_analysis(&graph, corpus, DEFAULT_SUBSET_FLOOR)?, &path(SUPERSEDED_FILE))?;
    let scans = security_scan(corpus, &PatternSet::builtin());
    let propagation = propagate(&scans, &graph, corpus)?;
    write_json(&propagation, &path(SECURITY_FILE))?;
    write_text(&propagation_csv(&propagation), &path(SECURITY_CSV))?;

    Ok(PipelineRun {
        index,
        model,
        graph,
        filter,
        report,
    })
}

/// Summary line for logs and the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub n_skills: usize,
    pub candidates: usize,
    pub edges: usize,
    pub components: usize,
    pub inflation_ratio: f64,
}

impl From<&PipelineRun> for RunSummary {
    fn from(run: &PipelineRun) -> Self {
        RunSummary {
            n_skills: run.report.n_skills,
            candidates: run.filter.candidates,
            edges: run.report.n_pairs,
            components: run.report.n_components,
            inflation_ratio: run.report.inflation_ratio,
        }
    }
}
