//! Similarity profiles, the quadratic feature map and the logistic fusion
//! model that turns them into a clone probability.

pub mod logistic;
pub mod threshold;
mod train;

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classify::CloneType;
use crate::encoder::{structural_similarity, SkillIndex};
use crate::error::{Error, Result};

pub use threshold::{grid_search_threshold, Confusion};
pub use train::{cross_validate, out_of_fold_scores, stratified_folds, train, train_on_features, ThresholdMode, TrainOptions};

pub const N_FEATURES: usize = 8;
pub const MODEL_FORMAT_VERSION: u32 = 1;

pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "flat", "s_y", "s_n", "s_c", "s_y*s_n", "s_n*s_c", "s_y*s_c", "struct",
];

/// Evidence about one pair of skills.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityProfile {
    pub s_y: f64,
    pub s_n: f64,
    pub s_c: f64,
    pub p_y: bool,
    pub p_n: bool,
    pub p_c: bool,
    pub flat: f64,
    pub struct_sim: f64,
}

impl SimilarityProfile {
    /// Builds a profile, clamping similarities to `[0, 1]` and zeroing
    /// absent channels.
    #[allow(clippy::too_many_arguments)]
    pub fn new(s_y: f64, s_n: f64, s_c: f64, p_y: bool, p_n: bool, p_c: bool, flat: f64, struct_sim: f64) -> Self {
        let gate = |s: f64, p: bool| if p { s.clamp(0.0, 1.0) } else { 0.0 };
        SimilarityProfile {
            s_y: gate(s_y, p_y),
            s_n: gate(s_n, p_n),
            s_c: gate(s_c, p_c),
            p_y,
            p_n,
            p_c,
            flat: flat.clamp(0.0, 1.0),
            struct_sim: struct_sim.clamp(0.0, 1.0),
        }
    }

    pub fn channels(&self) -> [(f64, bool); 3] {
        [(self.s_y, self.p_y), (self.s_n, self.p_n), (self.s_c, self.p_c)]
    }

    /// Mean similarity over present channels, 0 when none is present.
    pub fn mean_present(&self) -> f64 {
        let present: Vec<f64> = self.channels().iter().filter(|c| c.1).map(|c| c.0).collect();
        if present.is_empty() {
            0.0
        } else {
            present.iter().sum::<f64>() / present.len() as f64
        }
    }
}

pub fn build_profile(index: &SkillIndex, i: usize, j: usize) -> Result<SimilarityProfile> {
    let n = index.len();
    for channel in [&index.yaml, &index.nl, &index.code, &index.flat] {
        if channel.n_docs() != n {
            return Err(Error::Config(format!(
                "{} index covers {} documents, expected {n}",
                channel.channel.name(),
                channel.n_docs()
            )));
        }
    }
    if index.structural.len() != n {
        return Err(Error::Config("structural features do not cover the corpus".into()));
    }
    if i >= n || j >= n {
        return Err(Error::Argument(format!("pair ({i}, {j}) outside a corpus of {n}")));
    }
    let (s_y, p_y) = index.yaml.similarity(i, j);
    let (s_n, p_n) = index.nl.similarity(i, j);
    let (s_c, p_c) = index.code.similarity(i, j);
    let (flat, _) = index.flat.similarity(i, j);
    let struct_sim = structural_similarity(&index.structural[i], &index.structural[j]);
    Ok(SimilarityProfile::new(s_y, s_n, s_c, p_y, p_n, p_c, flat, struct_sim))
}

/// `[flat, s_y, s_n, s_c, s_y·s_n, s_n·s_c, s_y·s_c, struct]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; N_FEATURES]);

impl FeatureVector {
    pub fn masked(&self, mask: &[bool; N_FEATURES]) -> FeatureVector {
        let mut out = self.0;
        for (x, keep) in out.iter_mut().zip(mask) {
            if !keep {
                *x = 0.0;
            }
        }
        FeatureVector(out)
    }
}

/// Lifts a profile into the fusion feature space. Any term touching an
/// absent channel is exactly zero.
pub fn featurize(profile: &SimilarityProfile) -> FeatureVector {
    let y = if profile.p_y { profile.s_y } else { 0.0 };
    let n = if profile.p_n { profile.s_n } else { 0.0 };
    let c = if profile.p_c { profile.s_c } else { 0.0 };
    FeatureVector([profile.flat, y, n, c, y * n, n * c, y * c, profile.struct_sim])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    pub folds: usize,
    pub cv_f1_mean: f64,
    pub cv_f1_std: f64,
    pub iterations: usize,
    pub final_grad_norm: f64,
    pub n_pairs: usize,
}

/// Logistic fusion model: 8 weights, bias and decision threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ModelFile", try_from = "ModelFile")]
pub struct FusionModel {
    pub weights: [f64; N_FEATURES],
    pub bias: f64,
    pub threshold: f64,
    pub training_meta: Option<TrainingMeta>,
}

impl FusionModel {
    pub fn new(weights: [f64; N_FEATURES], bias: f64, threshold: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::Argument(format!("threshold {threshold} outside (0, 1)")));
        }
        Ok(FusionModel {
            weights,
            bias,
            threshold,
            training_meta: None,
        })
    }

    pub fn logit(&self, fv: &FeatureVector) -> f64 {
        self.weights.iter().zip(&fv.0).map(|(w, x)| w * x).sum::<f64>() + self.bias
    }

    pub fn predict(&self, fv: &FeatureVector) -> f64 {
        sigmoid(self.logit(fv))
    }

    pub fn is_clone(&self, fv: &FeatureVector) -> bool {
        self.predict(fv) >= self.threshold
    }

    /// Additive contribution `w_k · x_k` of every feature.
    pub fn explain(&self, fv: &FeatureVector) -> Vec<(&'static str, f64)> {
        FEATURE_NAMES
            .iter()
            .zip(self.weights.iter().zip(&fv.0))
            .map(|(name, (w, x))| (*name, w * x))
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct NamedWeights {
    flat: f64,
    s_y: f64,
    s_n: f64,
    s_c: f64,
    s_y_s_n: f64,
    s_n_s_c: f64,
    s_y_s_c: f64,
    struct_sim: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    weights: NamedWeights,
    bias: f64,
    threshold: f64,
    #[serde(default)]
    training_meta: Option<TrainingMeta>,
}

impl From<FusionModel> for ModelFile {
    fn from(m: FusionModel) -> Self {
        let w = m.weights;
        ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            weights: NamedWeights {
                flat: w[0],
                s_y: w[1],
                s_n: w[2],
                s_c: w[3],
                s_y_s_n: w[4],
                s_n_s_c: w[5],
                s_y_s_c: w[6],
                struct_sim: w[7],
            },
            bias: m.bias,
            threshold: m.threshold,
            training_meta: m.training_meta,
        }
    }
}

impl TryFrom<ModelFile> for FusionModel {
    type Error = String;

    fn try_from(f: ModelFile) -> std::result::Result<Self, String> {
        if f.format_version != MODEL_FORMAT_VERSION {
            return Err(format!("unsupported model format version {}", f.format_version));
        }
        if !(f.threshold > 0.0 && f.threshold < 1.0) {
            return Err(format!("threshold {} outside (0, 1)", f.threshold));
        }
        let w = f.weights;
        Ok(FusionModel {
            weights: [w.flat, w.s_y, w.s_n, w.s_c, w.s_y_s_n, w.s_n_s_c, w.s_y_s_c, w.struct_sim],
            bias: f.bias,
            threshold: f.threshold,
            training_meta: f.training_meta,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Hard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSource {
    Fork,
    Mutation,
    CrossCategory,
    SameCategory,
}

/// One ground-truth pair of a benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPair {
    pub id_a: String,
    pub id_b: String,
    pub label: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clone_type: Option<CloneType>,
    pub difficulty: Difficulty,
    pub source: PairSource,
    /// Mutation operator that produced the pair, when applicable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<String>,
}

impl LabeledPair {
    pub fn validate(&self) -> Result<()> {
        if self.label != self.clone_type.is_some() {
            return Err(Error::Argument(format!(
                "pair ({}, {}): clone_type must be present exactly for positive pairs",
                self.id_a, self.id_b
            )));
        }
        Ok(())
    }

    /// Unordered identity of the pair.
    pub fn key(&self) -> (String, String) {
        if self.id_a <= self.id_b {
            (self.id_a.clone(), self.id_b.clone())
        } else {
            (self.id_b.clone(), self.id_a.clone())
        }
    }
}

pub fn read_pairs(path: &Path) -> Result<Vec<LabeledPair>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let pair: LabeledPair = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: n + 1,
            message: e.to_string(),
        })?;
        pair.validate()?;
        pairs.push(pair);
    }
    Ok(pairs)
}

pub fn write_pairs(pairs: &[LabeledPair], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    for pair in pairs {
        serde_json::to_writer(&mut out, pair)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Profiles of the given pairs, resolved through the index.
pub fn pair_profiles(pairs: &[LabeledPair], index: &SkillIndex) -> Result<Vec<SimilarityProfile>> {
    pairs
        .iter()
        .map(|p| build_profile(index, index.require(&p.id_a)?, index.require(&p.id_b)?))
        .collect()
}
