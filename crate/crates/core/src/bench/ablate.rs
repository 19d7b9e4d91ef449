use serde::{Deserialize, Serialize};

use crate::encoder::SkillIndex;
use crate::error::Result;
use crate::fusion::{featurize, out_of_fold_scores, pair_profiles, Confusion, FeatureVector, LabeledPair, ThresholdMode, TrainOptions, N_FEATURES};

/// Feature groups removed one at a time, as indices into the feature vector.
pub const GROUPS: [(&str, &[usize]); 5] = [
    ("channels+interactions", &[1, 2, 3, 4, 5, 6]),
    ("struct", &[7]),
    ("flat", &[0]),
    ("yaml", &[1, 4, 6]),
    ("code", &[3, 5, 6]),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub configuration: String,
    pub removed: Vec<usize>,
    pub f1: f64,
    /// F1 minus the full model's F1.
    pub delta: f64,
}

fn mask_without(removed: &[usize]) -> [bool; N_FEATURES] {
    let mut mask = [true; N_FEATURES];
    for &k in removed {
        mask[k] = false;
    }
    mask
}

/// Out-of-fold F1 with the given features zeroed.
pub fn masked_f1(pairs: &[LabeledPair], features: &[FeatureVector], removed: &[usize], seed: u64, options: &TrainOptions) -> Result<f64> {
    let opts = TrainOptions {
        mask: mask_without(removed),
        ..*options
    };
    let scores = out_of_fold_scores(pairs, features, &opts, seed)?;
    let labels: Vec<bool> = pairs.iter().map(|p| p.label).collect();
    let threshold = match options.threshold {
        ThresholdMode::Fixed(t) => t,
        ThresholdMode::GridSearch(step) => crate::fusion::grid_search_threshold(&scores, &labels, step)?.0,
    };
    Ok(Confusion::at_threshold(&scores, &labels, threshold).f1())
}

/// Retrains with each feature group removed and reports the F1 change. All
/// rows share one fold assignment.
pub fn ablate(pairs: &[LabeledPair], index: &SkillIndex, seed: u64, options: &TrainOptions) -> Result<Vec<AblationRow>> {
    let features: Vec<FeatureVector> = pair_profiles(pairs, index)?.iter().map(featurize).collect();
    let full = masked_f1(pairs, &features, &[], seed, options)?;
    let mut rows = vec![AblationRow {
        configuration: "full".into(),
        removed: Vec::new(),
        f1: full,
        delta: 0.0,
    }];
    let mut configurations: Vec<(String, Vec<usize>)> =
        GROUPS.iter().map(|(name, idx)| (format!("-{name}"), idx.to_vec())).collect();
    configurations.push(("tfidf-only".into(), (1..N_FEATURES).collect()));
    for (name, removed) in configurations {
        let f1 = masked_f1(pairs, &features, &removed, seed, options)?;
        rows.push(AblationRow {
            configuration: name,
            removed,
            f1,
            delta: f1 - full,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::CloneType;
    use crate::fusion::{Difficulty, PairSource};
    use rand::Rng;

    fn data(seed: u64) -> (Vec<LabeledPair>, Vec<FeatureVector>) {
        let mut rng = crate::seed::rng(seed);
        let mut pairs = Vec::new();
        let mut features = Vec::new();
        for k in 0..120 {
            let label = k % 2 == 0;
            // Only the flat score carries signal.
            let flat: f64 = if label { rng.random_range(0.55..1.0) } else { rng.random_range(0.0..0.45) };
            let mut x = [0.0; N_FEATURES];
            x[0] = flat;
            x[7] = rng.random();
            features.push(FeatureVector(x));
            pairs.push(LabeledPair {
                id_a: format!("a{k}"),
                id_b: format!("b{k}"),
                label,
                clone_type: label.then_some(CloneType::T3),
                difficulty: Difficulty::Easy,
                source: PairSource::Mutation,
                operator: None,
            });
        }
        (pairs, features)
    }

    #[test]
    fn unused_groups_do_not_matter() {
        let (pairs, features) = data(1);
        let options = TrainOptions::default();
        let full = masked_f1(&pairs, &features, &[], 0, &options).unwrap();
        assert_eq!(full, 1.0);
        // Channel features are identically zero here.
        let without = masked_f1(&pairs, &features, GROUPS[0].1, 0, &options).unwrap();
        assert!((without - full).abs() < 1e-12);
        let no_flat = masked_f1(&pairs, &features, &[0], 0, &options).unwrap();
        assert!(no_flat < full);
    }

    #[test]
    fn repeat_is_identical() {
        let (pairs, features) = data(2);
        let options = TrainOptions::default();
        let a: Vec<f64> = GROUPS.iter().map(|g| masked_f1(&pairs, &features, g.1, 3, &options).unwrap()).collect();
        let b: Vec<f64> = GROUPS.iter().map(|g| masked_f1(&pairs, &features, g.1, 3, &options).unwrap()).collect();
        assert_eq!(a, b);
    }
}
