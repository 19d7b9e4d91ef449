//! NL-channel candidate pre-filter.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::encoder::{ChannelIndex, SkillIndex};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateOptions {
    pub theta_cand: f64,
    /// Rows per block in the blockwise product.
    pub block_size: usize,
    /// Also admit pairs with an NL-absent side when their flat cosine clears
    /// `theta_cand`.
    pub flat_fallback: bool,
}

impl Default for CandidateOptions {
    fn default() -> Self {
        CandidateOptions {
            theta_cand: 0.10,
            block_size: 512,
            flat_fallback: false,
        }
    }
}

/// Unit rows for present documents, zero rows otherwise.
fn present_rows(nl: &ChannelIndex) -> DMatrix<f64> {
    let n = nl.n_docs();
    match nl.normalized_embeddings() {
        Some(flat) if nl.dim() > 0 => {
            let d = nl.dim();
            DMatrix::from_fn(n, d, |i, k| if nl.presence[i] { flat[i * d + k] } else { 0.0 })
        }
        _ => DMatrix::zeros(n, 0),
    }
}

/// Unordered pairs `(i, j)`, `i < j`, whose clamped NL cosine is at least
/// `theta_cand`, in lexicographic order. Absent NL counts as cosine 0.
pub fn candidate_pairs(index: &SkillIndex, options: &CandidateOptions) -> Vec<(usize, usize)> {
    let n = index.len();
    let theta = options.theta_cand;
    let rows = present_rows(&index.nl);
    let block = options.block_size.max(1);
    let starts: Vec<usize> = (0..n).step_by(block).collect();
    let tiles: Vec<(usize, usize)> = starts
        .iter()
        .enumerate()
        .flat_map(|(a, &r)| starts[a..].iter().map(move |&c| (r, c)))
        .collect();
    let mut pairs: Vec<(usize, usize)> = tiles
        .par_iter()
        .flat_map_iter(|&(r0, c0)| {
            let (rl, cl) = (block.min(n - r0), block.min(n - c0));
            let product = rows.rows(r0, rl) * rows.rows(c0, cl).transpose();
            let mut found = Vec::new();
            for a in 0..rl {
                for b in 0..cl {
                    let (i, j) = (r0 + a, c0 + b);
                    if i < j && product[(a, b)].max(0.0) >= theta {
                        found.push((i, j));
                    }
                }
            }
            found
        })
        .collect();
    if options.flat_fallback {
        let absent: Vec<usize> = (0..n).filter(|&i| !index.nl.presence[i]).collect();
        let extra: Vec<(usize, usize)> = absent
            .par_iter()
            .flat_map_iter(|&i| {
                (0..n)
                    .filter(move |&j| j != i && (index.nl.presence[j] || i < j))
                    .filter(move |&j| index.flat.cosine(i, j).max(0.0) >= theta)
                    .map(move |j| (i.min(j), i.max(j)))
            })
            .collect();
        pairs.extend(extra);
    }
    pairs.par_sort_unstable();
    pairs.dedup();
    pairs
}

/// Fraction of all unordered pairs removed by the filter.
pub fn reduction(n_docs: usize, n_candidates: usize) -> f64 {
    let total = n_docs * n_docs.saturating_sub(1) / 2;
    if total == 0 {
        0.0
    } else {
        1.0 - n_candidates as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SkillRecord;
    use crate::encoder::IndexConfig;
    use crate::parser::parse_skill;

    fn index(texts: &[&str]) -> SkillIndex {
        let docs: Vec<_> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| parse_skill(SkillRecord::new(format!("s{i}"), "", "", "", t.to_string())))
            .collect();
        SkillIndex::fit(&docs, IndexConfig { dim: 8, ..IndexConfig::default() }).unwrap()
    }

    fn sample() -> SkillIndex {
        index(&[
            "Parse the invoice table and export totals to a spreadsheet for finance review.",
            "Parse the invoice table and export totals into a spreadsheet for the finance team.",
            "Deploy the container image to the staging cluster and watch rollout health.",
            "Rotate database credentials weekly and audit every access grant carefully.",
            "```python\nimport os\nprint(os.getcwd())\n```",
            "```python\nimport os\nprint(os.getcwd())\n```",
        ])
    }

    fn brute(index: &SkillIndex, theta: f64) -> Vec<(usize, usize)> {
        let n = index.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let (s, _) = index.nl.similarity(i, j);
                if s.max(0.0) >= theta {
                    out.push((i, j));
                }
            }
        }
        out
    }

    #[test]
    fn zero_threshold_yields_every_pair() {
        let idx = sample();
        let pairs = candidate_pairs(&idx, &CandidateOptions { theta_cand: 0.0, block_size: 4, flat_fallback: false });
        assert_eq!(pairs.len(), 6 * 5 / 2);
    }

    #[test]
    fn above_one_yields_nothing() {
        let idx = sample();
        let opts = CandidateOptions { theta_cand: 1.0 + 1e-9, ..Default::default() };
        assert!(candidate_pairs(&idx, &opts).is_empty());
    }

    #[test]
    fn block_size_does_not_change_result() {
        let idx = sample();
        for theta in [0.05, 0.1, 0.3, 0.8] {
            let expected = brute(&idx, theta);
            for block in [1, 2, 3, 7, 512] {
                let got = candidate_pairs(&idx, &CandidateOptions { theta_cand: theta, block_size: block, flat_fallback: false });
                // Matrix and loop cosines may differ in the last ulp.
                let near: Vec<_> = expected
                    .iter()
                    .filter(|&&(i, j)| (idx.nl.similarity(i, j).0 - theta).abs() > 1e-12)
                    .collect();
                for p in near {
                    assert!(got.contains(p), "theta {theta} block {block} missing {p:?}");
                }
                for &(i, j) in &got {
                    assert!(idx.nl.similarity(i, j).0 >= theta - 1e-12);
                }
            }
        }
    }

    #[test]
    fn fallback_admits_code_only_pairs() {
        let idx = sample();
        let plain = candidate_pairs(&idx, &CandidateOptions::default());
        assert!(!plain.contains(&(4, 5)));
        let with = candidate_pairs(&idx, &CandidateOptions { flat_fallback: true, ..Default::default() });
        assert!(with.contains(&(4, 5)));
        assert!(plain.iter().all(|p| with.contains(p)));
    }

    #[test]
    fn reduction_fraction() {
        assert_eq!(reduction(4, 3), 0.5);
        assert_eq!(reduction(1, 0), 0.0);
    }
}
