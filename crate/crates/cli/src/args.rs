use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use skilltwin_core::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "skilltwin", version, about = "Multi-channel clone detection for agent skills")]
pub struct Cli {
    #[command(flatten)]
    pub config: ConfigArgs,

    /// Log verbosity; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    /// Do not echo the resolved configuration to stderr.
    #[arg(short, long, global = true, env = "SKILLTWIN_QUIET")]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

fn open_unit(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside (0, 1)"))
    }
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

/// Run parameters. Precedence: flag, then environment, then `--config`,
/// then built-in default.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON file with any subset of the run configuration.
    #[arg(long, global = true, env = "SKILLTWIN_CONFIG")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, env = "SKILLTWIN_SEED")]
    pub seed: Option<u64>,
    /// Latent dimension per channel.
    #[arg(long, global = true, env = "SKILLTWIN_D", value_parser = positive)]
    pub d: Option<usize>,
    /// Decision threshold on the fused probability.
    #[arg(long, visible_alias = "threshold", global = true, env = "SKILLTWIN_THETA", value_parser = open_unit)]
    pub theta: Option<f64>,
    /// NL cosine floor for candidate pairs.
    #[arg(long, global = true, env = "SKILLTWIN_THETA_CAND", value_parser = open_unit)]
    pub theta_cand: Option<f64>,
    #[arg(long, global = true, env = "SKILLTWIN_TAU1", value_parser = open_unit)]
    pub tau1: Option<f64>,
    #[arg(long, global = true, env = "SKILLTWIN_DELTA", value_parser = open_unit)]
    pub delta: Option<f64>,
    #[arg(long, global = true, env = "SKILLTWIN_TAU2", value_parser = open_unit)]
    pub tau2: Option<f64>,
    #[arg(long, global = true, env = "SKILLTWIN_VOCAB_CAP", value_parser = positive)]
    pub vocab_cap: Option<usize>,
    #[arg(long, global = true, env = "SKILLTWIN_BLOCK_SIZE", value_parser = positive)]
    pub block_size: Option<usize>,
    /// Worker threads (0: one per core).
    #[arg(long, short = 'j', global = true, env = "SKILLTWIN_JOBS")]
    pub jobs: Option<usize>,
    /// Also pair NL-absent skills by flat cosine.
    #[arg(long, global = true, env = "SKILLTWIN_FLAT_FALLBACK")]
    pub flat_fallback: bool,
}

impl ConfigArgs {
    pub fn apply(&self, mut config: RunConfig) -> RunConfig {
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field {
                    config.$field = v;
                }
            )*};
        }
        set!(seed, d, theta, theta_cand, tau1, delta, tau2, vocab_cap, block_size, jobs);
        config.flat_fallback |= self.flat_fallback;
        config
    }
}

/// Corpus input shared by most commands.
#[derive(Debug, Clone, Args)]
pub struct CorpusArgs {
    /// JSONL file of skill records, or a directory of markdown files.
    #[arg(long, env = "SKILLTWIN_CORPUS")]
    pub corpus: Option<PathBuf>,
    /// Corpus layout; inferred from the path when omitted.
    #[arg(long, env = "SKILLTWIN_FORMAT", value_parser = ["jsonl", "dir"])]
    pub format: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct OutArg {
    /// Output path; stdout when omitted.
    #[arg(long, short, env = "SKILLTWIN_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decompose skills into frontmatter, prose, code and structure.
    Parse {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// Fit the per-channel encoders.
    Index {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// Fit the fusion model on labelled pairs.
    Train(TrainArgs),
    /// Score candidate pairs and write the clone edges.
    Detect(DetectArgs),
    /// Profile, score and type one pair.
    Classify(ClassifyArgs),
    /// Benchmark generation and evaluation.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Clone-graph analyses over a detected edge list.
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Vulnerable-pattern scan and propagation.
    #[command(subcommand)]
    Security(SecurityCommand),
    /// Full pipeline: index, train, detect and every report.
    Report(ReportArgs),
    /// Generate a synthetic skill corpus.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// JSONL labelled pairs over the corpus ids.
    #[arg(long, env = "SKILLTWIN_PAIRS")]
    pub pairs: Option<PathBuf>,
    /// Pick the threshold by grid search with this step instead of --theta.
    #[arg(long)]
    pub grid_step: Option<f64>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long, env = "SKILLTWIN_MODEL")]
    pub model: Option<PathBuf>,
    /// Prebuilt index over the same corpus; rebuilt when omitted.
    #[arg(long, env = "SKILLTWIN_INDEX")]
    pub index: Option<PathBuf>,
    /// Score every pair instead of the NL candidates.
    #[arg(long)]
    pub exhaustive: bool,
    /// Edge list destination (JSONL); stdout when omitted.
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long)]
    pub a: String,
    #[arg(long)]
    pub b: String,
    #[arg(long, env = "SKILLTWIN_INDEX")]
    pub index: Option<PathBuf>,
    /// Adds the fused probability and decision.
    #[arg(long, env = "SKILLTWIN_MODEL")]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Build a labelled benchmark from a corpus, or from a synthetic one.
    Gen(BenchGenArgs),
    /// Compare the fusion model with every baseline.
    Run(BenchEvalArgs),
    /// Retrain with feature groups removed.
    Ablate(BenchEvalArgs),
}

#[derive(Debug, Args)]
pub struct BenchGenArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// JSONL of verified positive pairs over the corpus, used before mutations.
    #[arg(long, requires = "corpus")]
    pub forks: Option<PathBuf>,
    /// Size of the synthetic source corpus when --corpus is omitted.
    #[arg(long, default_value_t = 150)]
    pub synth_skills: usize,
    #[arg(long, default_value_t = 30)]
    pub t1: usize,
    #[arg(long, default_value_t = 30)]
    pub t2: usize,
    #[arg(long, default_value_t = 60)]
    pub t3: usize,
    #[arg(long, default_value_t = 30)]
    pub t4: usize,
    #[arg(long, default_value_t = 50)]
    pub easy: usize,
    #[arg(long, default_value_t = 100)]
    pub hard: usize,
    /// Output directory for corpus.jsonl, pairs.jsonl and summary.json.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchEvalArgs {
    /// Benchmark directory written by `bench gen`.
    #[arg(long)]
    pub bench: Option<PathBuf>,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long, env = "SKILLTWIN_PAIRS")]
    pub pairs: Option<PathBuf>,
    #[arg(long, default_value_t = 0.01)]
    pub grid_step: f64,
    /// Emit JSON instead of a table.
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct EdgesArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// JSONL edge list from `detect`.
    #[arg(long, env = "SKILLTWIN_EDGES")]
    pub edges: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum GraphCommand {
    /// Connected components of the clone graph.
    Build {
        #[command(flatten)]
        edges: EdgesArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// Ecosystem statistics.
    Report {
        #[command(flatten)]
        edges: EdgesArgs,
        #[arg(long)]
        csv: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// Superseded members and strict subsets within clone families.
    Superseded {
        #[command(flatten)]
        edges: EdgesArgs,
        #[arg(long, default_value_t = 0.70)]
        subset_floor: f64,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum SecurityCommand {
    /// Skills matching each vulnerable-pattern category.
    Scan {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        patterns: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// How matched skills spread through clone edges.
    Propagate {
        #[command(flatten)]
        edges: EdgesArgs,
        #[arg(long)]
        patterns: Option<PathBuf>,
        #[arg(long)]
        csv: bool,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Benchmark directory used for training.
    #[arg(long)]
    pub bench: Option<PathBuf>,
    /// Corpus the training pairs refer to.
    #[arg(long)]
    pub train_corpus: Option<PathBuf>,
    #[arg(long, env = "SKILLTWIN_PAIRS")]
    pub pairs: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 200)]
    pub skills: usize,
    #[arg(long, default_value_t = 40)]
    pub authors: usize,
    #[arg(long, default_value_t = 0.10)]
    pub fork_rate: f64,
    #[arg(long, default_value_t = 0.02)]
    pub duplicate_rate: f64,
    #[command(flatten)]
    pub out: OutArg,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds() {
        assert!(open_unit("0.5").is_ok());
        assert!(open_unit("0").is_err() && open_unit("1").is_err() && open_unit("x").is_err());
        assert!(positive("0").is_err() && positive("3") == Ok(3));
    }

    #[test]
    fn flags_override_the_base_config() {
        let cli = Cli::parse_from(["skilltwin", "--theta", "0.7", "--jobs", "2", "synth"]);
        let base = RunConfig { seed: 9, theta: 0.6, ..RunConfig::default() };
        let merged = cli.config.apply(base);
        assert_eq!((merged.seed, merged.theta, merged.jobs), (9, 0.7, 2));
    }
}
