//! Seeded randomized truncated SVD of a sparse matrix (range finder with
//! oversampling and subspace power iterations).

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

use super::tfidf::SparseMatrix;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SvdParams {
    pub rank: usize,
    pub oversample: usize,
    pub power_iters: usize,
    pub seed: u64,
}

/// Top right-singular vectors (row-major `n_cols × k`) and their singular
/// values, `k = min(rank, n_rows, n_cols)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSvd {
    pub k: usize,
    pub components: Vec<f64>,
    pub singular_values: Vec<f64>,
}

fn orthonormal_basis(rows: usize, cols: usize, row_major: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, row_major).qr().q()
}

fn to_row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

/// Flips each column so that its largest-magnitude entry is positive.
pub fn fix_signs(components: &mut [f64], n_rows: usize, k: usize) {
    for col in 0..k {
        let mut best = 0.0f64;
        for r in 0..n_rows {
            let v = components[r * k + col];
            if v.abs() > best.abs() {
                best = v;
            }
        }
        if best < 0.0 {
            for r in 0..n_rows {
                components[r * k + col] = -components[r * k + col];
            }
        }
    }
}

pub fn randomized_svd(a: &SparseMatrix, params: SvdParams) -> TruncatedSvd {
    let max_rank = a.n_rows.min(a.n_cols);
    let k = params.rank.min(max_rank);
    if k == 0 || a.nnz() == 0 {
        return TruncatedSvd {
            k: 0,
            components: Vec::new(),
            singular_values: Vec::new(),
        };
    }
    let l = (k + params.oversample).min(max_rank);

    let mut rng = seed::rng(params.seed);
    let omega: Vec<f64> = (0..a.n_cols * l)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();

    let mut q = orthonormal_basis(a.n_rows, l, &a.mul_dense(&omega, l));
    for _ in 0..params.power_iters {
        let z = orthonormal_basis(a.n_cols, l, &a.transpose_mul_dense(&to_row_major(&q), l));
        q = orthonormal_basis(a.n_rows, l, &a.mul_dense(&to_row_major(&z), l));
    }

    // Bᵀ = Aᵀ Q; its left singular vectors are the right singular vectors of A.
    let bt = DMatrix::from_row_slice(a.n_cols, l, &a.transpose_mul_dense(&to_row_major(&q), l));
    let svd = bt.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    order.truncate(k);

    let mut components = vec![0.0; a.n_cols * k];
    for (col, &src) in order.iter().enumerate() {
        for r in 0..a.n_cols {
            components[r * k + col] = u[(r, src)];
        }
    }
    fix_signs(&mut components, a.n_cols, k);
    TruncatedSvd {
        k,
        components,
        singular_values: order.iter().map(|&s| svd.singular_values[s]).collect(),
    }
}
