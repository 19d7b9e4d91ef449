use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::candidates::{candidate_pairs, reduction, CandidateOptions};
use super::{CloneGraph, Edge};
use crate::classify::{classify, TypeThresholds};
use crate::encoder::SkillIndex;
use crate::error::{Error, Result};
use crate::fusion::{build_profile, featurize, FusionModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectOptions {
    pub candidates: CandidateOptions,
    /// Acceptance threshold on the fused probability.
    pub theta: f64,
    pub thresholds: TypeThresholds,
    /// Score all pairs and skip the pre-filter.
    pub exhaustive: bool,
}

impl Default for DetectOptions {
    fn default() -> Self {
        DetectOptions {
            candidates: CandidateOptions::default(),
            theta: 0.5,
            thresholds: TypeThresholds::default(),
            exhaustive: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterStats {
    pub n_docs: usize,
    pub total_pairs: usize,
    pub candidates: usize,
    /// Fraction of all pairs removed before scoring.
    pub reduction: f64,
    pub accepted: usize,
}

pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Scores the given pairs and keeps those with probability at least `theta`.
/// A pair's score does not depend on which other pairs are scored.
pub fn score_pairs(
    index: &SkillIndex,
    model: &FusionModel,
    pairs: &[(usize, usize)],
    theta: f64,
    thresholds: &TypeThresholds,
) -> Result<Vec<Edge>> {
    let scored: Vec<Option<Edge>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let profile = build_profile(index, i, j)?;
            let probability = model.predict(&featurize(&profile));
            if probability < theta {
                return Ok(None);
            }
            let clone_type = match classify(&profile, thresholds) {
                Ok(c) => Some(c.clone_type),
                Err(Error::Classification(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(Some(Edge::new(&index.ids[i], &index.ids[j], probability, clone_type, profile)))
        })
        .collect::<Result<_>>()?;
    Ok(scored.into_iter().flatten().collect())
}

pub fn detect_with_stats(index: &SkillIndex, model: &FusionModel, options: &DetectOptions) -> Result<(CloneGraph, FilterStats)> {
    options.thresholds.validate()?;
    let n = index.len();
    let pairs = if options.exhaustive {
        all_pairs(n)
    } else {
        candidate_pairs(index, &options.candidates)
    };
    let edges = score_pairs(index, model, &pairs, options.theta, &options.thresholds)?;
    let stats = FilterStats {
        n_docs: n,
        total_pairs: n * n.saturating_sub(1) / 2,
        candidates: pairs.len(),
        reduction: reduction(n, pairs.len()),
        accepted: edges.len(),
    };
    log::info!(
        "scored {} of {} pairs, accepted {}",
        stats.candidates,
        stats.total_pairs,
        stats.accepted
    );
    Ok((CloneGraph::new(index.ids.clone(), edges)?, stats))
}

/// Candidate filtering, scoring, acceptance and typing over a fitted index.
pub fn detect_all(index: &SkillIndex, model: &FusionModel, options: &DetectOptions) -> Result<CloneGraph> {
    detect_with_stats(index, model, options).map(|r| r.0)
}
