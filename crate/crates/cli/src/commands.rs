use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use skilltwin_core::bench::synth::{generate, SynthConfig};
use skilltwin_core::bench::{ablate, compare_methods, generate_benchmark, render_table, BenchCounts, GenerateOptions, HardBand};
use skilltwin_core::corpus::{load_corpus, write_records_jsonl};
use skilltwin_core::fusion::{build_profile, featurize, read_pairs, train, write_pairs, ThresholdMode, TrainOptions};
use skilltwin_core::graph::export::{component_summary, ecosystem_csv, propagation_csv, read_edges_jsonl, write_edges_jsonl};
use skilltwin_core::graph::{
    detect_with_stats, ecosystem_report, propagate, security_scan, superseded_analysis, DetectOptions, PatternSet,
};
use skilltwin_core::pipeline::{build_index, parse_corpus, run_pipeline, RunSummary, TrainingData};
use skilltwin_core::{classify, seed, CloneGraph, Corpus, FusionModel, LoadFormat, RunConfig, SkillIndex};

use crate::args::*;
use crate::UsageError;

const BENCH_CORPUS: &str = "corpus.jsonl";
const BENCH_PAIRS: &str = "pairs.jsonl";
const BENCH_SUMMARY: &str = "summary.json";

fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

fn required(value: Option<PathBuf>, fallback: &Option<PathBuf>, flag: &str) -> Result<PathBuf> {
    value.or_else(|| fallback.clone()).ok_or_else(|| usage(format!("missing --{flag}")))
}

fn load(args: &CorpusArgs, config: &RunConfig) -> Result<Corpus> {
    let path = required(args.corpus.clone(), &config.paths.corpus, "corpus")?;
    let format = match args.format.as_deref() {
        Some(f) => f.parse::<LoadFormat>()?,
        None if path.is_dir() => LoadFormat::Directory,
        None => LoadFormat::Jsonl,
    };
    let corpus = load_corpus(&path, format)?;
    log::info!("loaded {} skills from {} ({} dropped)", corpus.len(), path.display(), corpus.dropped());
    Ok(corpus)
}

fn index_for(corpus: &Corpus, path: Option<&Path>, config: &RunConfig) -> Result<SkillIndex> {
    let Some(path) = path else {
        return Ok(build_index(corpus, config)?);
    };
    let index = SkillIndex::load(path)?;
    let same = index.ids.len() == corpus.len() && index.ids.iter().zip(corpus.records()).all(|(i, r)| *i == r.id);
    if !same {
        bail!("index {} was not built from this corpus", path.display());
    }
    Ok(index)
}

fn emit_text(text: &str, out: &OutArg) -> Result<()> {
    match &out.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn emit<T: Serialize>(value: &T, out: &OutArg) -> Result<()> {
    emit_text(&(serde_json::to_string_pretty(value)? + "\n"), out)
}

/// Prints a JSON summary on stdout; used when the main output went to a file.
fn summary<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string(value)?);
    Ok(())
}

fn graph_for(args: &EdgesArgs, config: &RunConfig) -> Result<(Corpus, CloneGraph)> {
    let corpus = load(&args.corpus, config)?;
    let edges = read_edges_jsonl(&args.edges)?;
    let nodes = corpus.records().iter().map(|r| r.id.clone()).collect();
    Ok((corpus, CloneGraph::new(nodes, edges)?))
}

fn patterns(path: Option<&Path>) -> Result<PatternSet> {
    Ok(path.map(PatternSet::load).transpose()?.unwrap_or_else(PatternSet::builtin))
}

/// Resolves `--bench DIR` or explicit `--corpus`/`--pairs` into a labelled set.
fn training_inputs(
    bench: Option<&Path>,
    corpus: Option<PathBuf>,
    pairs: Option<PathBuf>,
    config: &RunConfig,
) -> Result<(Corpus, Vec<skilltwin_core::LabeledPair>)> {
    let (corpus_path, pairs_path) = match bench {
        Some(dir) => (dir.join(BENCH_CORPUS), dir.join(BENCH_PAIRS)),
        None => (
            required(corpus, &config.paths.corpus, "corpus")?,
            required(pairs, &config.paths.pairs, "pairs")?,
        ),
    };
    let corpus = load_corpus(&corpus_path, LoadFormat::Jsonl)?;
    Ok((corpus, read_pairs(&pairs_path)?))
}

pub fn run(command: Command, config: &RunConfig) -> Result<()> {
    match command {
        Command::Parse { corpus, out } => {
            let docs = parse_corpus(&load(&corpus, config)?);
            let mut text = String::new();
            for doc in &docs {
                text.push_str(&serde_json::to_string(doc)?);
                text.push('\n');
            }
            emit_text(&text, &out)
        }
        Command::Index { corpus, out } => {
            let index = build_index(&load(&corpus, config)?, config)?;
            match &out.out {
                Some(path) => {
                    index.save(path)?;
                    summary(&serde_json::json!({
                        "skills": index.len(),
                        "dims": {"yaml": index.yaml.dim(), "nl": index.nl.dim(), "code": index.code.dim()},
                        "index": path,
                    }))
                }
                None => emit(&index, &out),
            }
        }
        Command::Train(args) => {
            let (corpus, pairs) = training_inputs(None, args.corpus.corpus.clone(), args.pairs.clone(), config)?;
            let index = build_index(&corpus, config)?;
            let options = TrainOptions {
                threshold: match args.grid_step {
                    Some(step) if step > 0.0 && step < 1.0 => ThresholdMode::GridSearch(step),
                    Some(step) => return Err(usage(format!("--grid-step {step} is outside (0, 1)"))),
                    None => ThresholdMode::Fixed(config.theta),
                },
                ..config.train_options()
            };
            let model = train(&pairs, &index, config.train_seed(), &options)?;
            match &args.out.out {
                Some(path) => {
                    model.save(path)?;
                    summary(&model)
                }
                None => emit(&model, &args.out),
            }
        }
        Command::Detect(args) => {
            let corpus = load(&args.corpus, config)?;
            let model = FusionModel::load(&required(args.model.clone(), &config.paths.model, "model")?)?;
            let index = index_for(&corpus, args.index.as_deref().or(config.paths.index.as_deref()), config)?;
            let options = DetectOptions {
                exhaustive: args.exhaustive,
                ..config.detect_options()
            };
            let (graph, stats) = detect_with_stats(&index, &model, &options)?;
            match &args.out.out {
                Some(path) => {
                    write_edges_jsonl(&graph, path)?;
                    summary(&serde_json::json!({
                        "filter": stats,
                        "edges": graph.edges().len(),
                        "components": graph.components().len(),
                    }))
                }
                None => {
                    let mut text = String::new();
                    for edge in graph.edges() {
                        text.push_str(&serde_json::to_string(edge)?);
                        text.push('\n');
                    }
                    emit_text(&text, &args.out)
                }
            }
        }
        Command::Classify(args) => {
            let corpus = load(&args.corpus, config)?;
            let index = index_for(&corpus, args.index.as_deref(), config)?;
            let (i, j) = (index.require(&args.a)?, index.require(&args.b)?);
            let profile = build_profile(&index, i, j)?;
            let features = featurize(&profile);
            let mut value = serde_json::json!({
                "id_a": args.a,
                "id_b": args.b,
                "profile": profile,
                "features": features.0,
            });
            match classify(&profile, &config.thresholds()) {
                Ok(c) => value["classification"] = serde_json::to_value(c)?,
                Err(e) => value["classification_error"] = e.to_string().into(),
            }
            if let Some(path) = args.model.as_deref() {
                let model = FusionModel::load(path)?;
                value["probability"] = model.predict(&features).into();
                value["clone"] = model.is_clone(&features).into();
            }
            emit(&value, &args.out)
        }
        Command::Bench(BenchCommand::Gen(args)) => bench_gen(args, config),
        Command::Bench(BenchCommand::Run(args)) => {
            let (corpus, pairs) = training_inputs(args.bench.as_deref(), args.corpus.corpus.clone(), args.pairs.clone(), config)?;
            let index = build_index(&corpus, config)?;
            let rows = compare_methods(&pairs, &index, &corpus, config.train_seed(), args.grid_step)?;
            if args.json {
                emit(&rows.into_iter().collect::<indexmap::IndexMap<_, _>>(), &args.out)
            } else {
                emit_text(&render_table(&rows), &args.out)
            }
        }
        Command::Bench(BenchCommand::Ablate(args)) => {
            let (corpus, pairs) = training_inputs(args.bench.as_deref(), args.corpus.corpus.clone(), args.pairs.clone(), config)?;
            let index = build_index(&corpus, config)?;
            let options = TrainOptions {
                threshold: ThresholdMode::GridSearch(args.grid_step),
                ..TrainOptions::default()
            };
            let rows = ablate(&pairs, &index, config.train_seed(), &options)?;
            if args.json {
                emit(&rows, &args.out)
            } else {
                let mut text = format!("{:<24}  {:>6}  {:>7}\n", "configuration", "F1", "delta");
                for r in &rows {
                    text.push_str(&format!("{:<24}  {:>6.3}  {:>+7.3}\n", r.configuration, r.f1, r.delta));
                }
                emit_text(&text, &args.out)
            }
        }
        Command::Graph(GraphCommand::Build { edges, out }) => {
            let (_, graph) = graph_for(&edges, config)?;
            emit(&component_summary(&graph), &out)
        }
        Command::Graph(GraphCommand::Report { edges, csv, out }) => {
            let (corpus, graph) = graph_for(&edges, config)?;
            let report = ecosystem_report(&graph, &corpus)?;
            if csv {
                emit_text(&ecosystem_csv(&report), &out)
            } else {
                emit(&report, &out)
            }
        }
        Command::Graph(GraphCommand::Superseded { edges, subset_floor, out }) => {
            if !(0.0..=1.0).contains(&subset_floor) {
                return Err(usage(format!("--subset-floor {subset_floor} is outside [0, 1]")));
            }
            let (corpus, graph) = graph_for(&edges, config)?;
            emit(&superseded_analysis(&graph, &corpus, subset_floor)?, &out)
        }
        Command::Security(SecurityCommand::Scan { corpus, patterns: p, out }) => {
            let corpus = load(&corpus, config)?;
            emit(&security_scan(&corpus, &patterns(p.as_deref())?), &out)
        }
        Command::Security(SecurityCommand::Propagate { edges, patterns: p, csv, out }) => {
            let (corpus, graph) = graph_for(&edges, config)?;
            let scans = security_scan(&corpus, &patterns(p.as_deref())?);
            let report = propagate(&scans, &graph, &corpus)?;
            if csv {
                emit_text(&propagation_csv(&report), &out)
            } else {
                emit(&report, &out)
            }
        }
        Command::Report(args) => {
            let corpus = load(&args.corpus, config)?;
            let (train_corpus, pairs) = training_inputs(args.bench.as_deref(), args.train_corpus.clone(), args.pairs.clone(), config)?;
            let training = TrainingData {
                corpus: &train_corpus,
                pairs: &pairs,
            };
            let run = run_pipeline(&corpus, training, config, &args.out)?;
            summary(&RunSummary::from(&run))
        }
        Command::Synth(args) => {
            let synth = generate(&SynthConfig {
                n_skills: args.skills,
                n_authors: args.authors,
                fork_rate: args.fork_rate,
                duplicate_rate: args.duplicate_rate,
                seed: seed::derive(config.seed, "synth"),
                ..SynthConfig::default()
            })?;
            let mut text = String::new();
            for record in &synth.records {
                text.push_str(&serde_json::to_string(record)?);
                text.push('\n');
            }
            emit_text(&text, &args.out)
        }
    }
}

fn bench_gen(args: BenchGenArgs, config: &RunConfig) -> Result<()> {
    let corpus = if args.corpus.corpus.is_some() || config.paths.corpus.is_some() {
        load(&args.corpus, config)?
    } else {
        let synth = generate(&SynthConfig {
            n_skills: args.synth_skills,
            fork_rate: 0.0,
            duplicate_rate: 0.0,
            seed: seed::derive(config.seed, "synth"),
            ..SynthConfig::default()
        })?;
        Corpus::from_records(synth.records)?
    };
    let options = GenerateOptions {
        counts: BenchCounts::new(args.t1, args.t2, args.t3, args.t4, args.easy, args.hard),
        seed: config.bench_seed(),
        band: HardBand::default(),
        index: config.index_config(),
    };
    let forks = args.forks.as_deref().map(read_pairs).transpose()?.unwrap_or_default();
    let bench = generate_benchmark(&corpus, &forks, &options)?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_records_jsonl(&bench.records, &args.out.join(BENCH_CORPUS))?;
    write_pairs(&bench.pairs, &args.out.join(BENCH_PAIRS))?;
    let stats = serde_json::json!({
        "skills": bench.records.len(),
        "pairs": bench.pairs.len(),
        "positives": bench.pairs.iter().filter(|p| p.label).count(),
        "seed_skills": bench.seed_skills(),
        "skipped": bench.skipped.len(),
    });
    std::fs::write(args.out.join(BENCH_SUMMARY), serde_json::to_string_pretty(&stats)? + "\n")?;
    summary(&stats)
}
