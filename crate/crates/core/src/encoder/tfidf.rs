use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

/// Compressed sparse row matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseMatrix {
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `self * dense`, with `dense` row-major `n_cols × width`; output row-major
    /// `n_rows × width`.
    pub fn mul_dense(&self, dense: &[f64], width: usize) -> Vec<f64> {
        debug_assert_eq!(dense.len(), self.n_cols * width);
        let mut out = vec![0.0; self.n_rows * width];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            let target = &mut out[i * width..(i + 1) * width];
            for (&c, &v) in cols.iter().zip(vals) {
                let source = &dense[c * width..(c + 1) * width];
                for (t, s) in target.iter_mut().zip(source) {
                    *t += v * s;
                }
            }
        }
        out
    }

    /// `selfᵀ * dense`, with `dense` row-major `n_rows × width`; output
    /// row-major `n_cols × width`.
    pub fn transpose_mul_dense(&self, dense: &[f64], width: usize) -> Vec<f64> {
        debug_assert_eq!(dense.len(), self.n_rows * width);
        let mut out = vec![0.0; self.n_cols * width];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            let source = &dense[i * width..(i + 1) * width];
            for (&c, &v) in cols.iter().zip(vals) {
                let target = &mut out[c * width..(c + 1) * width];
                for (t, s) in target.iter_mut().zip(source) {
                    *t += v * s;
                }
            }
        }
        out
    }

    pub fn to_dense_row_major(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_rows * self.n_cols];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                out[i * self.n_cols + c] = v;
            }
        }
        out
    }
}

/// Smoothed inverse document frequency: `ln((1 + n) / (1 + df)) + 1`.
pub fn smoothed_idf(n_docs: usize, df: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

/// Terms ranked by document frequency (ties lexicographic), capped, then
/// returned in lexicographic order.
pub fn build_vocabulary(docs: &[Vec<String>], cap: usize) -> (Vec<String>, Vec<usize>) {
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for tokens in docs {
        let mut unique: Vec<&str> = tokens.iter().map(String::as_str).collect();
        unique.sort_unstable();
        unique.dedup();
        for t in unique {
            *df.entry(t).or_default() += 1;
        }
    }
    let mut ranked: Vec<(&str, usize)> = df.into_iter().collect();
    if ranked.len() > cap {
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        ranked.truncate(cap);
        ranked.sort_by(|a, b| a.0.cmp(b.0));
    }
    let terms = ranked.iter().map(|(t, _)| t.to_string()).collect();
    let dfs = ranked.iter().map(|&(_, d)| d).collect();
    (terms, dfs)
}

/// A fitted TF-IDF model together with the L2-normalized document rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TfIdf {
    pub vocabulary: Vec<String>,
    pub idf: Vec<f64>,
    pub matrix: SparseMatrix,
}

/// Raw count × smoothed idf, rows L2-normalized. Empty rows stay zero.
pub fn fit_tfidf(docs: &[Vec<String>], vocab_cap: usize) -> TfIdf {
    let (vocabulary, dfs) = build_vocabulary(docs, vocab_cap);
    let idf: Vec<f64> = dfs.iter().map(|&d| smoothed_idf(docs.len(), d)).collect();
    let column: HashMap<&str, usize> = vocabulary
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();

    let mut indptr = Vec::with_capacity(docs.len() + 1);
    let mut indices = Vec::new();
    let mut values = Vec::new();
    indptr.push(0);
    for tokens in docs {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for t in tokens {
            if let Some(&c) = column.get(t.as_str()) {
                *counts.entry(c).or_default() += 1.0;
            }
        }
        let weighted: Vec<(usize, f64)> = counts.into_iter().map(|(c, n)| (c, n * idf[c])).collect();
        let norm = weighted.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        for (c, w) in weighted {
            indices.push(c);
            values.push(if norm > 0.0 { w / norm } else { 0.0 });
        }
        indptr.push(indices.len());
    }
    let matrix = SparseMatrix {
        n_rows: docs.len(),
        n_cols: vocabulary.len(),
        indptr,
        indices,
        values,
    };
    TfIdf {
        vocabulary,
        idf,
        matrix,
    }
}

/// Dot product of two sorted sparse vectors.
pub fn sparse_dot(a: (&[usize], &[f64]), b: (&[usize], &[f64])) -> f64 {
    let (ai, av) = a;
    let (bi, bv) = b;
    let (mut x, mut y) = (0, 0);
    let mut sum = 0.0;
    while x < ai.len() && y < bi.len() {
        match ai[x].cmp(&bi[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                sum += av[x] * bv[y];
                x += 1;
                y += 1;
            }
        }
    }
    sum
}
