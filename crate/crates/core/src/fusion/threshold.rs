use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary confusion counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn from_predictions(predicted: impl IntoIterator<Item = bool>, labels: &[bool]) -> Self {
        let mut c = Confusion::default();
        for (p, &l) in predicted.into_iter().zip(labels) {
            match (p, l) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    pub fn at_threshold(scores: &[f64], labels: &[bool], threshold: f64) -> Self {
        Self::from_predictions(scores.iter().map(|&s| s >= threshold), labels)
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// Harmonic mean of precision and recall, 0 when both are 0.
    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r > 0.0 {
            2.0 * p * r / (p + r)
        } else {
            0.0
        }
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Interior grid points `step, 2·step, …, 1 − step`.
pub fn threshold_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step < 0.5) {
        return Err(Error::Argument(format!("grid step {step} outside (0, 0.5)")));
    }
    let n = (1.0 / step).round() as usize;
    Ok((1..n).map(|k| k as f64 / n as f64).collect())
}

/// The grid threshold maximizing F1; ties go to the larger threshold.
pub fn grid_search_threshold(scores: &[f64], labels: &[bool], step: f64) -> Result<(f64, f64)> {
    if scores.len() != labels.len() {
        return Err(Error::Argument(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for theta in threshold_grid(step)? {
        let f1 = Confusion::at_threshold(scores, labels, theta).f1();
        if f1 >= best.1 {
            best = (theta, f1);
        }
    }
    Ok(best)
}
