//! Per-channel TF-IDF + truncated SVD embeddings, the flat whole-document
//! TF-IDF representation and the pairwise similarity primitives.

pub mod svd;
pub mod tfidf;

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parser::{self, SkillDocument, StructuralFeatures, N_STRUCTURAL};
use crate::{seed, text};
use svd::{randomized_svd, SvdParams};
use tfidf::{fit_tfidf, sparse_dot, SparseMatrix};

pub const INDEX_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Yaml,
    Nl,
    Code,
    Flat,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::Yaml, Channel::Nl, Channel::Code, Channel::Flat];

    pub fn name(self) -> &'static str {
        match self {
            Channel::Yaml => "yaml",
            Channel::Nl => "nl",
            Channel::Code => "code",
            Channel::Flat => "flat",
        }
    }

    /// Default presence floor: one YAML field, five NL or code tokens, any
    /// flat token.
    pub fn presence_rule(self) -> PresenceRule {
        match self {
            Channel::Yaml | Channel::Flat => PresenceRule { min_tokens: 1 },
            Channel::Nl | Channel::Code => PresenceRule { min_tokens: 5 },
        }
    }

    pub fn tokenize(self, doc: &SkillDocument) -> Vec<String> {
        match self {
            Channel::Yaml => tokenize_yaml(doc),
            Channel::Nl => text::tokenize_nl(&doc.nl_body),
            Channel::Code => text::tokenize_code(&doc.code_blocks),
            Channel::Flat => text::tokenize_flat(&doc.record.raw_text),
        }
    }
}

/// Minimum token count for a channel to count as present in a document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresenceRule {
    pub min_tokens: usize,
}

/// YAML tokens: keys in lexicographic order, each followed by its value words.
pub fn tokenize_yaml(doc: &SkillDocument) -> Vec<String> {
    let mut keys: Vec<&String> = doc.yaml.keys().collect();
    keys.sort();
    let mut tokens = Vec::new();
    for key in keys {
        tokens.push(key.trim().to_lowercase());
        tokens.extend(text::words(&doc.yaml[key].text()));
    }
    tokens
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexConfig {
    pub dim: usize,
    pub vocab_cap: usize,
    pub oversample: usize,
    pub power_iters: usize,
    pub seed: u64,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig {
            dim: 256,
            vocab_cap: 50_000,
            oversample: 10,
            power_iters: 2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Representation {
    /// Dense LSA embeddings; `projection` is row-major `vocab × dim`,
    /// `embeddings` row-major `docs × dim`.
    Latent {
        dim: usize,
        singular_values: Vec<f64>,
        projection: Vec<f64>,
        embeddings: Vec<f64>,
        norms: Vec<f64>,
    },
    /// L2-normalized sparse TF-IDF rows.
    Sparse { rows: SparseMatrix },
}

/// A fitted channel representation for every document of a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelIndex {
    pub channel: Channel,
    pub vocabulary: Vec<String>,
    pub idf: Vec<f64>,
    pub presence: Vec<bool>,
    pub representation: Representation,
}

pub fn fit_channel_index(docs: &[SkillDocument], channel: Channel, config: &IndexConfig) -> Result<ChannelIndex> {
    let tokens: Vec<Vec<String>> = docs.iter().map(|d| channel.tokenize(d)).collect();
    fit_tokens(&tokens, channel, config)
}

/// Fits a channel index from pre-tokenized documents.
pub fn fit_tokens(tokens: &[Vec<String>], channel: Channel, config: &IndexConfig) -> Result<ChannelIndex> {
    if tokens.len() < 2 {
        return Err(Error::Argument(format!(
            "a channel index needs at least 2 documents, got {}",
            tokens.len()
        )));
    }
    if config.dim == 0 {
        return Err(Error::Argument("embedding dimension must be at least 1".into()));
    }
    let tfidf = fit_tfidf(tokens, config.vocab_cap);
    let rule = channel.presence_rule();
    let presence: Vec<bool> = tokens
        .iter()
        .enumerate()
        .map(|(i, t)| t.len() >= rule.min_tokens && !tfidf.matrix.row(i).0.is_empty())
        .collect();

    let representation = if channel == Channel::Flat {
        Representation::Sparse { rows: tfidf.matrix }
    } else {
        let decomposition = randomized_svd(
            &tfidf.matrix,
            SvdParams {
                rank: config.dim,
                oversample: config.oversample,
                power_iters: config.power_iters,
                seed: seed::derive(config.seed, channel.name()),
            },
        );
        let k = decomposition.k;
        let embeddings = if k == 0 {
            Vec::new()
        } else {
            tfidf.matrix.mul_dense(&decomposition.components, k)
        };
        let norms = (0..tokens.len())
            .map(|i| {
                if k == 0 {
                    0.0
                } else {
                    embeddings[i * k..(i + 1) * k].iter().map(|x| x * x).sum::<f64>().sqrt()
                }
            })
            .collect();
        Representation::Latent {
            dim: k,
            singular_values: decomposition.singular_values,
            projection: decomposition.components,
            embeddings,
            norms,
        }
    };

    Ok(ChannelIndex {
        channel,
        vocabulary: tfidf.vocabulary,
        idf: tfidf.idf,
        presence,
        representation,
    })
}

/// Cosine of two dense vectors, 0 when either is the zero vector.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

impl ChannelIndex {
    pub fn n_docs(&self) -> usize {
        self.presence.len()
    }

    /// Effective embedding width (vocabulary size for the sparse channel).
    pub fn dim(&self) -> usize {
        match &self.representation {
            Representation::Latent { dim, .. } => *dim,
            Representation::Sparse { rows } => rows.n_cols,
        }
    }

    pub fn embedding(&self, i: usize) -> Option<&[f64]> {
        match &self.representation {
            Representation::Latent { dim, embeddings, .. } => Some(&embeddings[i * dim..(i + 1) * dim]),
            Representation::Sparse { .. } => None,
        }
    }

    /// Cosine of rows `i` and `j` regardless of presence.
    pub fn cosine(&self, i: usize, j: usize) -> f64 {
        match &self.representation {
            Representation::Latent {
                dim, embeddings, norms, ..
            } => {
                let (ni, nj) = (norms[i], norms[j]);
                if ni == 0.0 || nj == 0.0 {
                    return 0.0;
                }
                let a = &embeddings[i * dim..(i + 1) * dim];
                let b = &embeddings[j * dim..(j + 1) * dim];
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                (dot / (ni * nj)).clamp(-1.0, 1.0)
            }
            Representation::Sparse { rows } => sparse_dot(rows.row(i), rows.row(j)).clamp(-1.0, 1.0),
        }
    }

    /// Cosine and joint presence. Absent on either side gives `(0, false)`.
    pub fn similarity(&self, i: usize, j: usize) -> (f64, bool) {
        if self.presence[i] && self.presence[j] {
            (self.cosine(i, j), true)
        } else {
            (0.0, false)
        }
    }

    /// Unit-length copies of the dense embedding rows (zero rows stay zero).
    pub fn normalized_embeddings(&self) -> Option<Vec<f64>> {
        match &self.representation {
            Representation::Latent {
                dim, embeddings, norms, ..
            } => {
                let mut out = embeddings.clone();
                for (i, &n) in norms.iter().enumerate() {
                    if n > 0.0 {
                        out[i * dim..(i + 1) * dim].iter_mut().for_each(|x| *x /= n);
                    }
                }
                Some(out)
            }
            Representation::Sparse { .. } => None,
        }
    }
}

/// `1 − ‖a − b‖₁ / 8` over normalized structural features.
pub fn structural_similarity(a: &StructuralFeatures, b: &StructuralFeatures) -> f64 {
    let l1: f64 = a.0.iter().zip(&b.0).map(|(x, y)| (x - y).abs()).sum();
    (1.0 - l1 / N_STRUCTURAL as f64).clamp(0.0, 1.0)
}

/// All channel indices and structural features of one corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillIndex {
    pub format_version: u32,
    pub config: IndexConfig,
    pub ids: Vec<String>,
    pub yaml: ChannelIndex,
    pub nl: ChannelIndex,
    pub code: ChannelIndex,
    pub flat: ChannelIndex,
    pub structural: Vec<StructuralFeatures>,
    #[serde(skip)]
    positions: HashMap<String, usize>,
}

impl SkillIndex {
    pub fn fit(docs: &[SkillDocument], config: IndexConfig) -> Result<Self> {
        let ((yaml, nl), (code, flat)) = rayon::join(
            || {
                rayon::join(
                    || fit_channel_index(docs, Channel::Yaml, &config),
                    || fit_channel_index(docs, Channel::Nl, &config),
                )
            },
            || {
                rayon::join(
                    || fit_channel_index(docs, Channel::Code, &config),
                    || fit_channel_index(docs, Channel::Flat, &config),
                )
            },
        );
        let structural = parser::normalize_features(docs)?;
        Self::from_parts(
            config,
            docs.iter().map(|d| d.record.id.clone()).collect(),
            [yaml?, nl?, code?, flat?],
            structural,
        )
    }

    /// Assembles an index, checking that every part covers the same corpus.
    pub fn from_parts(
        config: IndexConfig,
        ids: Vec<String>,
        channels: [ChannelIndex; 4],
        structural: Vec<StructuralFeatures>,
    ) -> Result<Self> {
        let [yaml, nl, code, flat] = channels;
        let n = ids.len();
        for (expected, index) in Channel::ALL.iter().zip([&yaml, &nl, &code, &flat]) {
            if index.channel != *expected {
                return Err(Error::Config(format!(
                    "expected the {} channel, found {}",
                    expected.name(),
                    index.channel.name()
                )));
            }
            if index.n_docs() != n {
                return Err(Error::Config(format!(
                    "{} index covers {} documents but the corpus has {n}",
                    index.channel.name(),
                    index.n_docs()
                )));
            }
        }
        if structural.len() != n {
            return Err(Error::Config(format!(
                "structural features cover {} documents but the corpus has {n}",
                structural.len()
            )));
        }
        let mut index = SkillIndex {
            format_version: INDEX_FORMAT_VERSION,
            config,
            ids,
            yaml,
            nl,
            code,
            flat,
            structural,
            positions: HashMap::new(),
        };
        index.rebuild_positions()?;
        Ok(index)
    }

    fn rebuild_positions(&mut self) -> Result<()> {
        self.positions = HashMap::with_capacity(self.ids.len());
        for (i, id) in self.ids.iter().enumerate() {
            if self.positions.insert(id.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate id `{id}` in index")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.positions.get(id).copied()
    }

    pub fn require(&self, id: &str) -> Result<usize> {
        self.position(id).ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    pub fn channel(&self, channel: Channel) -> &ChannelIndex {
        match channel {
            Channel::Yaml => &self.yaml,
            Channel::Nl => &self.nl,
            Channel::Code => &self.code,
            Channel::Flat => &self.flat,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let index: SkillIndex = serde_json::from_reader(std::io::BufReader::new(file))?;
        if index.format_version != INDEX_FORMAT_VERSION {
            return Err(Error::Config(format!(
                "unsupported index format version {}",
                index.format_version
            )));
        }
        let SkillIndex {
            config,
            ids,
            yaml,
            nl,
            code,
            flat,
            structural,
            ..
        } = index;
        Self::from_parts(config, ids, [yaml, nl, code, flat], structural)
    }
}
