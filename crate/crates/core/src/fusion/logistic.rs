//! Class-weighted, L2-penalized logistic regression fitted by damped Newton
//! iterations with a backtracking line search.

use nalgebra::{DMatrix, DVector};

use super::{sigmoid, FeatureVector, N_FEATURES};
use crate::error::{Error, Result};

/// Parameter layout: 8 weights followed by the bias.
pub const N_PARAMS: usize = N_FEATURES + 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Penalty on the weights (never on the bias).
    pub l2: f64,
    pub max_iter: usize,
    /// Convergence bound on the gradient infinity norm.
    pub tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            l2: 1e-4,
            max_iter: 10_000,
            tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub weights: [f64; N_FEATURES],
    pub bias: f64,
    pub iterations: usize,
    pub grad_norm: f64,
}

/// A weighted binary log-likelihood problem.
#[derive(Debug, Clone)]
pub struct LogisticProblem {
    features: Vec<[f64; N_FEATURES]>,
    labels: Vec<f64>,
    sample_weights: Vec<f64>,
    total_weight: f64,
    l2: f64,
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

impl LogisticProblem {
    /// Builds the problem with balanced class weights `n / (2 · n_class)`.
    pub fn balanced(features: &[FeatureVector], labels: &[bool], l2: f64) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::Argument("features and labels differ in length".into()));
        }
        let n = labels.len() as f64;
        let n_pos = labels.iter().filter(|&&l| l).count() as f64;
        let n_neg = n - n_pos;
        if n_pos == 0.0 || n_neg == 0.0 {
            return Err(Error::Training("training data contains a single class".into()));
        }
        let w_pos = n / (2.0 * n_pos);
        let w_neg = n / (2.0 * n_neg);
        let sample_weights: Vec<f64> = labels.iter().map(|&l| if l { w_pos } else { w_neg }).collect();
        Ok(LogisticProblem {
            features: features.iter().map(|f| f.0).collect(),
            labels: labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect(),
            total_weight: sample_weights.iter().sum(),
            sample_weights,
            l2,
        })
    }

    fn linear(&self, params: &[f64; N_PARAMS], x: &[f64; N_FEATURES]) -> f64 {
        x.iter().zip(params).map(|(a, b)| a * b).sum::<f64>() + params[N_FEATURES]
    }

    /// Penalized mean weighted log-likelihood (to be maximized).
    pub fn objective(&self, params: &[f64; N_PARAMS]) -> f64 {
        let mut ll = 0.0;
        for ((x, &y), &c) in self.features.iter().zip(&self.labels).zip(&self.sample_weights) {
            let z = self.linear(params, x);
            ll += c * (y * z - softplus(z));
        }
        let penalty: f64 = params[..N_FEATURES].iter().map(|w| w * w).sum();
        ll / self.total_weight - 0.5 * self.l2 * penalty
    }

    pub fn gradient(&self, params: &[f64; N_PARAMS]) -> [f64; N_PARAMS] {
        let mut g = [0.0; N_PARAMS];
        for ((x, &y), &c) in self.features.iter().zip(&self.labels).zip(&self.sample_weights) {
            let r = c * (y - sigmoid(self.linear(params, x)));
            for k in 0..N_FEATURES {
                g[k] += r * x[k];
            }
            g[N_FEATURES] += r;
        }
        g.iter_mut().for_each(|v| *v /= self.total_weight);
        for k in 0..N_FEATURES {
            g[k] -= self.l2 * params[k];
        }
        g
    }

    /// Negated Hessian of the objective (positive semi-definite).
    fn curvature(&self, params: &[f64; N_PARAMS]) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(N_PARAMS, N_PARAMS);
        for (x, &c) in self.features.iter().zip(&self.sample_weights) {
            let p = sigmoid(self.linear(params, x));
            let s = c * p * (1.0 - p) / self.total_weight;
            let mut xt = [1.0; N_PARAMS];
            xt[..N_FEATURES].copy_from_slice(x);
            for a in 0..N_PARAMS {
                for b in 0..N_PARAMS {
                    h[(a, b)] += s * xt[a] * xt[b];
                }
            }
        }
        for k in 0..N_FEATURES {
            h[(k, k)] += self.l2;
        }
        h
    }

    fn newton_direction(&self, params: &[f64; N_PARAMS], grad: &[f64; N_PARAMS]) -> [f64; N_PARAMS] {
        let g = DVector::from_column_slice(grad);
        let mut h = self.curvature(params);
        let mut ridge = 0.0;
        for _ in 0..20 {
            if let Some(chol) = h.clone().cholesky() {
                let step = chol.solve(&g);
                let mut out = [0.0; N_PARAMS];
                out.copy_from_slice(step.as_slice());
                return out;
            }
            ridge = if ridge == 0.0 { 1e-10 } else { ridge * 10.0 };
            for k in 0..N_PARAMS {
                h[(k, k)] += ridge;
            }
        }
        *grad
    }

    pub fn fit(&self, options: &FitOptions) -> Result<Fit> {
        let mut params = [0.0; N_PARAMS];
        let mut value = self.objective(&params);
        let mut grad = self.gradient(&params);
        let norm = |g: &[f64; N_PARAMS]| g.iter().fold(0.0f64, |m, x| m.max(x.abs()));

        for iteration in 0..options.max_iter {
            let grad_norm = norm(&grad);
            if grad_norm < options.tolerance {
                return Ok(self.finish(params, iteration, grad_norm));
            }
            let direction = self.newton_direction(&params, &grad);
            let slope: f64 = direction.iter().zip(&grad).map(|(d, g)| d * g).sum();
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let mut trial = params;
                for k in 0..N_PARAMS {
                    trial[k] += step * direction[k];
                }
                let trial_value = self.objective(&trial);
                if trial_value >= value + 1e-4 * step * slope {
                    params = trial;
                    value = trial_value;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            grad = self.gradient(&params);
            if !accepted {
                // No representable ascent step remains.
                let grad_norm = norm(&grad);
                if grad_norm < options.tolerance.sqrt() {
                    return Ok(self.finish(params, iteration + 1, grad_norm));
                }
                return Err(Error::NonConvergence {
                    iterations: iteration + 1,
                    grad_norm,
                });
            }
        }
        let grad_norm = norm(&grad);
        if grad_norm < options.tolerance {
            return Ok(self.finish(params, options.max_iter, grad_norm));
        }
        Err(Error::NonConvergence {
            iterations: options.max_iter,
            grad_norm,
        })
    }

    fn finish(&self, params: [f64; N_PARAMS], iterations: usize, grad_norm: f64) -> Fit {
        let mut weights = [0.0; N_FEATURES];
        weights.copy_from_slice(&params[..N_FEATURES]);
        Fit {
            weights,
            bias: params[N_FEATURES],
            iterations,
            grad_norm,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dataset(seed: u64, n: usize) -> (Vec<FeatureVector>, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for _ in 0..n {
            let label = rng.random_bool(0.4);
            let mut x = [0.0; N_FEATURES];
            for v in x.iter_mut() {
                let base: f64 = rng.random();
                *v = if label { (base * 0.7 + 0.3).min(1.0) } else { base * 0.7 };
            }
            xs.push(FeatureVector(x));
            ys.push(label);
        }
        (xs, ys)
    }

    #[test]
    fn separable_data_is_fit_exactly() {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..20 {
            xs.push(FeatureVector([0.9; N_FEATURES]));
            ys.push(true);
            xs.push(FeatureVector([0.1 + 0.001 * i as f64; N_FEATURES]));
            ys.push(false);
        }
        let problem = LogisticProblem::balanced(&xs, &ys, 1e-4).unwrap();
        let fit = problem.fit(&FitOptions::default()).unwrap();
        assert!(fit.grad_norm < 1e-8);
        for (x, y) in xs.iter().zip(&ys) {
            let z: f64 = fit.weights.iter().zip(&x.0).map(|(w, v)| w * v).sum::<f64>() + fit.bias;
            assert_eq!(sigmoid(z) >= 0.5, *y);
        }
    }

    #[test]
    fn single_class_is_rejected() {
        let xs = vec![FeatureVector([0.5; N_FEATURES]); 4];
        assert!(matches!(
            LogisticProblem::balanced(&xs, &[true; 4], 1e-4),
            Err(Error::Training(_))
        ));
    }

    #[test]
    fn iteration_cap_reports_gradient() {
        let (xs, ys) = dataset(4, 60);
        let problem = LogisticProblem::balanced(&xs, &ys, 1e-4).unwrap();
        let err = problem
            .fit(&FitOptions {
                max_iter: 1,
                ..FitOptions::default()
            })
            .unwrap_err();
        match err {
            Error::NonConvergence { iterations, grad_norm } => {
                assert_eq!(iterations, 1);
                assert!(grad_norm > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (xs, ys) = dataset(11, 40);
        let problem = LogisticProblem::balanced(&xs, &ys, 1e-2).unwrap();
        let params = [0.3, -0.2, 0.5, 0.1, -0.4, 0.2, 0.0, 0.7, -0.1];
        let g = problem.gradient(&params);
        let h = 1e-6;
        for k in 0..N_PARAMS {
            let mut up = params;
            let mut down = params;
            up[k] += h;
            down[k] -= h;
            let fd = (problem.objective(&up) - problem.objective(&down)) / (2.0 * h);
            assert!((fd - g[k]).abs() <= 1e-5 * fd.abs().max(1e-3), "param {k}: {fd} vs {}", g[k]);
        }
    }
}
