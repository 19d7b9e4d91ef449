use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::minhash::{estimate, MinHasher, Signature, DEFAULT_PERMUTATIONS};
use crate::corpus::Corpus;
use crate::encoder::SkillIndex;
use crate::error::{Error, Result};
use crate::fusion::{featurize, out_of_fold_scores, pair_profiles, FeatureVector, LabeledPair, TrainOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    FlatTfidf,
    Minhash,
    NlOnly,
    CodeOnly,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 4] = [
        BaselineKind::FlatTfidf,
        BaselineKind::Minhash,
        BaselineKind::NlOnly,
        BaselineKind::CodeOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::FlatTfidf => "flat_tfidf",
            BaselineKind::Minhash => "minhash",
            BaselineKind::NlOnly => "nl_only",
            BaselineKind::CodeOnly => "code_only",
        }
    }
}

impl std::str::FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BaselineKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown baseline `{s}`")))
    }
}

fn positions(pairs: &[LabeledPair], index: &SkillIndex) -> Result<Vec<(usize, usize)>> {
    pairs
        .iter()
        .map(|p| Ok((index.require(&p.id_a)?, index.require(&p.id_b)?)))
        .collect()
}

/// Scores every pair with a single-signal method. Channel baselines score
/// pairs with an absent channel as 0.
pub fn run_baseline(
    kind: BaselineKind,
    pairs: &[LabeledPair],
    index: &SkillIndex,
    corpus: &Corpus,
    seed_value: u64,
) -> Result<Vec<f64>> {
    match kind {
        BaselineKind::FlatTfidf | BaselineKind::NlOnly | BaselineKind::CodeOnly => {
            let channel = match kind {
                BaselineKind::FlatTfidf => &index.flat,
                BaselineKind::NlOnly => &index.nl,
                _ => &index.code,
            };
            let pos = positions(pairs, index)?;
            Ok(pos
                .par_iter()
                .map(|&(i, j)| {
                    let (s, present) = channel.similarity(i, j);
                    if present {
                        s.max(0.0)
                    } else {
                        0.0
                    }
                })
                .collect())
        }
        BaselineKind::Minhash => {
            let hasher = MinHasher::new(DEFAULT_PERMUTATIONS, seed_value);
            let mut ids: Vec<&str> = pairs.iter().flat_map(|p| [p.id_a.as_str(), p.id_b.as_str()]).collect();
            ids.sort_unstable();
            ids.dedup();
            let signatures: HashMap<&str, Signature> = ids
                .par_iter()
                .map(|&id| {
                    let record = corpus.get(id).ok_or_else(|| Error::UnknownId(id.to_string()))?;
                    Ok((id, hasher.signature(&record.raw_text)))
                })
                .collect::<Result<_>>()?;
            Ok(pairs
                .iter()
                .map(|p| estimate(&signatures[p.id_a.as_str()], &signatures[p.id_b.as_str()]))
                .collect())
        }
    }
}

/// Out-of-fold fusion probabilities: each pair is scored by a model trained
/// without its fold.
pub fn fusion_scores(pairs: &[LabeledPair], index: &SkillIndex, seed_value: u64, options: &TrainOptions) -> Result<Vec<f64>> {
    let features: Vec<FeatureVector> = pair_profiles(pairs, index)?.iter().map(featurize).collect();
    out_of_fold_scores(pairs, &features, options, seed_value)
}
