use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::classify::CloneType;
use crate::error::{Error, Result};
use crate::fusion::{grid_search_threshold, Confusion, LabeledPair, ThresholdMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Recall over positives of each type; precision per type is undefined
    /// because negatives carry no type.
    pub per_type_recall: BTreeMap<CloneType, f64>,
    pub per_type_count: BTreeMap<CloneType, usize>,
    pub confusion: Confusion,
    pub threshold: f64,
}

pub fn evaluate(scores: &[f64], pairs: &[LabeledPair], mode: ThresholdMode) -> Result<MetricsReport> {
    if scores.len() != pairs.len() {
        return Err(Error::Argument(format!("{} scores for {} pairs", scores.len(), pairs.len())));
    }
    let labels: Vec<bool> = pairs.iter().map(|p| p.label).collect();
    let threshold = match mode {
        ThresholdMode::Fixed(t) => t,
        ThresholdMode::GridSearch(step) => grid_search_threshold(scores, &labels, step)?.0,
    };
    let confusion = Confusion::at_threshold(scores, &labels, threshold);
    let mut hits: BTreeMap<CloneType, (usize, usize)> = BTreeMap::new();
    for (pair, &score) in pairs.iter().zip(scores) {
        if let (true, Some(t)) = (pair.label, pair.clone_type) {
            let e = hits.entry(t).or_default();
            e.1 += 1;
            if score >= threshold {
                e.0 += 1;
            }
        }
    }
    Ok(MetricsReport {
        precision: confusion.precision(),
        recall: confusion.recall(),
        f1: confusion.f1(),
        per_type_recall: hits.iter().map(|(&t, &(h, n))| (t, h as f64 / n as f64)).collect(),
        per_type_count: hits.iter().map(|(&t, &(_, n))| (t, n)).collect(),
        confusion,
        threshold,
    })
}

/// Aligned-column comparison table, one row per method.
pub fn render_table(rows: &[(String, MetricsReport)]) -> String {
    let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(6).max(6);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>5}  {:>5}  {:>5}  {:>5}  {:>5}  {:>5}  {:>5}  {:>5}",
        "method", "theta", "P", "R", "F1", "T1", "T2", "T3", "T4"
    );
    for (name, m) in rows {
        let per = |t| m.per_type_recall.get(&t).map_or("-".to_string(), |r| format!("{r:.3}"));
        let _ = writeln!(
            out,
            "{:<width$}  {:>5.2}  {:>5.3}  {:>5.3}  {:>5.3}  {:>5}  {:>5}  {:>5}  {:>5}",
            name,
            m.threshold,
            m.precision,
            m.recall,
            m.f1,
            per(CloneType::T1),
            per(CloneType::T2),
            per(CloneType::T3),
            per(CloneType::T4)
        );
    }
    out
}
