use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::classify::TypeThresholds;
use crate::encoder::IndexConfig;
use crate::error::{Error, Result};

/// Every tunable of a pipeline run. A run is reproducible from this plus the corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Latent dimension per channel.
    pub d: usize,
    pub theta: f64,
    pub theta_cand: f64,
    pub tau1: f64,
    pub delta: f64,
    pub tau2: f64,
    pub vocab_cap: usize,
    /// Rows per block in candidate generation.
    pub block_size: usize,
    /// Worker threads; 0 lets the runtime decide.
    pub jobs: usize,
    /// Also admit NL-absent pairs whose flat cosine clears `theta_cand`.
    pub flat_fallback: bool,
    pub paths: Paths,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub pairs: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = TypeThresholds::default();
        RunConfig {
            seed: 0,
            d: 256,
            theta: 0.50,
            theta_cand: 0.10,
            tau1: t.tau1,
            delta: t.delta,
            tau2: t.tau2,
            vocab_cap: 50_000,
            block_size: 512,
            jobs: 0,
            flat_fallback: false,
            paths: Paths::default(),
        }
    }
}

fn open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::Argument(format!("{name} = {v} must lie in (0, 1)")))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        open_unit("theta", self.theta)?;
        open_unit("theta_cand", self.theta_cand)?;
        open_unit("tau1", self.tau1)?;
        open_unit("delta", self.delta)?;
        open_unit("tau2", self.tau2)?;
        self.thresholds().validate()?;
        if self.d == 0 {
            return Err(Error::Argument("d must be at least 1".into()));
        }
        if self.vocab_cap == 0 {
            return Err(Error::Argument("vocab_cap must be at least 1".into()));
        }
        if self.block_size == 0 {
            return Err(Error::Argument("block_size must be at least 1".into()));
        }
        Ok(())
    }

    pub fn thresholds(&self) -> TypeThresholds {
        TypeThresholds {
            tau1: self.tau1,
            delta: self.delta,
            tau2: self.tau2,
        }
    }

    pub fn index_config(&self) -> IndexConfig {
        IndexConfig {
            dim: self.d,
            vocab_cap: self.vocab_cap,
            seed: crate::seed::derive(self.seed, "index"),
            ..IndexConfig::default()
        }
    }

    pub fn detect_options(&self) -> crate::graph::DetectOptions {
        crate::graph::DetectOptions {
            candidates: crate::graph::CandidateOptions {
                theta_cand: self.theta_cand,
                block_size: self.block_size,
                flat_fallback: self.flat_fallback,
            },
            theta: self.theta,
            thresholds: self.thresholds(),
            exhaustive: false,
        }
    }

    pub fn train_options(&self) -> crate::fusion::TrainOptions {
        crate::fusion::TrainOptions {
            threshold: crate::fusion::ThresholdMode::Fixed(self.theta),
            ..Default::default()
        }
    }

    pub fn train_seed(&self) -> u64 {
        crate::seed::derive(self.seed, "train")
    }

    pub fn bench_seed(&self) -> u64 {
        crate::seed::derive(self.seed, "bench")
    }

    /// Reads a JSON config; absent keys keep their defaults.
    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}
