use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use super::logistic::{FitOptions, LogisticProblem};
use super::threshold::{grid_search_threshold, Confusion};
use super::{featurize, pair_profiles, FeatureVector, FusionModel, LabeledPair, TrainingMeta, N_FEATURES};
use crate::encoder::SkillIndex;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdMode {
    Fixed(f64),
    /// Grid search on the training scores with the given step.
    GridSearch(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub fit: FitOptions,
    pub folds: usize,
    pub threshold: ThresholdMode,
    /// Features kept in the design matrix; dropped ones are zeroed.
    pub mask: [bool; N_FEATURES],
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            fit: FitOptions::default(),
            folds: 5,
            threshold: ThresholdMode::Fixed(0.5),
            mask: [true; N_FEATURES],
        }
    }
}

/// Stratum key: label, plus clone type for positives.
fn stratum(pair: &LabeledPair) -> (bool, Option<u8>) {
    (pair.label, pair.clone_type.map(|t| t as u8))
}

/// Fold assignment for every pair, stratified by (label, clone type).
pub fn stratified_folds(pairs: &[LabeledPair], folds: usize, seed: u64) -> Vec<usize> {
    let mut strata: BTreeMap<(bool, Option<u8>), Vec<usize>> = BTreeMap::new();
    for (i, p) in pairs.iter().enumerate() {
        strata.entry(stratum(p)).or_default().push(i);
    }
    let mut rng = seed::rng(seed);
    let mut assignment = vec![0; pairs.len()];
    let mut next = 0;
    for members in strata.values_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    assignment
}

fn fit_model(features: &[FeatureVector], labels: &[bool], options: &TrainOptions) -> Result<FusionModel> {
    let masked: Vec<FeatureVector> = features.iter().map(|f| f.masked(&options.mask)).collect();
    let problem = LogisticProblem::balanced(&masked, labels, options.fit.l2)?;
    let fit = problem.fit(&options.fit)?;
    let mut model = FusionModel {
        weights: fit.weights,
        bias: fit.bias,
        threshold: 0.5,
        training_meta: Some(TrainingMeta {
            seed: 0,
            folds: 0,
            cv_f1_mean: f64::NAN,
            cv_f1_std: f64::NAN,
            iterations: fit.iterations,
            final_grad_norm: fit.grad_norm,
            n_pairs: labels.len(),
        }),
    };
    model.threshold = match options.threshold {
        ThresholdMode::Fixed(t) => t,
        ThresholdMode::GridSearch(step) => {
            let scores: Vec<f64> = masked.iter().map(|f| model.predict(f)).collect();
            grid_search_threshold(&scores, labels, step)?.0
        }
    };
    if !(model.threshold > 0.0 && model.threshold < 1.0) {
        return Err(Error::Argument(format!("threshold {} outside (0, 1)", model.threshold)));
    }
    Ok(model)
}

/// Per-fold F1 of models trained on the remaining folds.
pub fn cross_validate(
    pairs: &[LabeledPair],
    features: &[FeatureVector],
    options: &TrainOptions,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut scores = Vec::new();
    for_each_fold(pairs, features, options, seed, |model, test_idx| {
        let labels: Vec<bool> = test_idx.iter().map(|&i| pairs[i].label).collect();
        let predicted = test_idx.iter().map(|&i| model.is_clone(&features[i].masked(&options.mask)));
        scores.push(Confusion::from_predictions(predicted, &labels).f1());
    })?;
    Ok(scores)
}

/// Probability for every pair from the model that did not see its fold.
pub fn out_of_fold_scores(
    pairs: &[LabeledPair],
    features: &[FeatureVector],
    options: &TrainOptions,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut scores = vec![f64::NAN; pairs.len()];
    for_each_fold(pairs, features, options, seed, |model, test_idx| {
        for &i in test_idx {
            scores[i] = model.predict(&features[i].masked(&options.mask));
        }
    })?;
    Ok(scores)
}

fn for_each_fold(
    pairs: &[LabeledPair],
    features: &[FeatureVector],
    options: &TrainOptions,
    seed: u64,
    mut visit: impl FnMut(&FusionModel, &[usize]),
) -> Result<()> {
    if pairs.len() != features.len() {
        return Err(Error::Argument("pairs and features differ in length".into()));
    }
    if options.folds < 2 {
        return Err(Error::Argument(format!("need at least 2 folds, got {}", options.folds)));
    }
    let labels: Vec<bool> = pairs.iter().map(|p| p.label).collect();
    let assignment = stratified_folds(pairs, options.folds, seed);
    for fold in 0..options.folds {
        let (train_idx, test_idx): (Vec<usize>, Vec<usize>) = (0..pairs.len()).partition(|&i| assignment[i] != fold);
        if test_idx.is_empty() {
            continue;
        }
        let train_x: Vec<FeatureVector> = train_idx.iter().map(|&i| features[i]).collect();
        let train_y: Vec<bool> = train_idx.iter().map(|&i| labels[i]).collect();
        let model = fit_model(&train_x, &train_y, options)?;
        visit(&model, &test_idx);
    }
    Ok(())
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Trains on precomputed feature vectors aligned with `pairs`.
pub fn train_on_features(
    pairs: &[LabeledPair],
    features: &[FeatureVector],
    seed: u64,
    options: &TrainOptions,
) -> Result<FusionModel> {
    if pairs.len() != features.len() {
        return Err(Error::Argument("pairs and features differ in length".into()));
    }
    for class in [true, false] {
        let n = pairs.iter().filter(|p| p.label == class).count();
        if n == 0 {
            return Err(Error::Training("training data contains a single class".into()));
        }
        if n < 2 {
            return Err(Error::Training(format!(
                "need at least 2 pairs per class, found {n} {}",
                if class { "positive" } else { "negative" }
            )));
        }
    }
    let labels: Vec<bool> = pairs.iter().map(|p| p.label).collect();
    let mut model = fit_model(features, &labels, options)?;
    let cv = cross_validate(pairs, features, options, seed::derive(seed, "cv"))?;
    let (mean, std) = mean_std(&cv);
    if let Some(meta) = model.training_meta.as_mut() {
        meta.seed = seed;
        meta.folds = options.folds;
        meta.cv_f1_mean = mean;
        meta.cv_f1_std = std;
    }
    Ok(model)
}

/// Fits the fusion model on labelled pairs resolved through `index`.
pub fn train(pairs: &[LabeledPair], index: &SkillIndex, seed: u64, options: &TrainOptions) -> Result<FusionModel> {
    for p in pairs {
        p.validate()?;
    }
    let features: Vec<FeatureVector> = pair_profiles(pairs, index)?.iter().map(featurize).collect();
    train_on_features(pairs, &features, seed, options)
}
