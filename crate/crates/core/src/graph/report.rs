use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::dsu::DisjointSets;
use super::CloneGraph;
use crate::corpus::{different_author, Corpus, SkillRecord};
use crate::error::{Error, Result};

/// Registry-level redundancy counts.
///
/// Components merge clone edges with exact-duplicate groups. Cluster sizes
/// count distinct contents, so a component made only of byte-identical copies
/// is a singleton and `n_singletons + Σ multi sizes = n_after_exact_dedup`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcosystemReport {
    pub n_skills: usize,
    /// Redundant copies: records beyond the first in each identical group.
    pub n_exact_dups: usize,
    /// Skills incident to at least one clone edge.
    pub n_in_clone_pair: usize,
    pub n_pairs: usize,
    pub n_cross_author_pairs: usize,
    pub n_after_exact_dedup: usize,
    pub n_components: usize,
    pub inflation_ratio: f64,
    pub n_singletons: usize,
    pub n_multi_clusters: usize,
    /// Distinct contents in the largest component.
    pub largest_cluster: usize,
    /// Distinct-content sizes of the multi-skill clusters, descending.
    pub multi_cluster_sizes: Vec<usize>,
}

/// Corpus records aligned with the graph's node order.
pub(crate) fn aligned_records<'a>(graph: &CloneGraph, corpus: &'a Corpus) -> Result<Vec<&'a SkillRecord>> {
    if graph.nodes().len() != corpus.len() {
        return Err(Error::Argument(format!(
            "graph has {} nodes but the corpus has {} skills",
            graph.nodes().len(),
            corpus.len()
        )));
    }
    graph
        .nodes()
        .iter()
        .map(|id| corpus.get(id).ok_or_else(|| Error::UnknownId(id.clone())))
        .collect()
}

/// Components over edges plus identical-content groups, in node positions.
pub fn concept_components(graph: &CloneGraph, records: &[&SkillRecord]) -> Vec<Vec<usize>> {
    let mut sets = DisjointSets::new(graph.nodes().len());
    for &(i, j) in graph.endpoints() {
        sets.union(i, j);
    }
    let mut first_by_hash = std::collections::HashMap::new();
    for (i, r) in records.iter().enumerate() {
        let first = *first_by_hash.entry(r.content_hash.as_str()).or_insert(i);
        sets.union(first, i);
    }
    sets.sets()
}

pub fn ecosystem_report(graph: &CloneGraph, corpus: &Corpus) -> Result<EcosystemReport> {
    let records = aligned_records(graph, corpus)?;
    let n_skills = records.len();
    let n_after_exact_dedup = corpus.by_hash().len();
    let n_in_clone_pair = (0..n_skills).filter(|&i| !graph.neighbors(i).is_empty()).count();
    let n_cross_author_pairs = graph
        .endpoints()
        .iter()
        .filter(|&&(i, j)| different_author(&records[i].author, &records[j].author))
        .count();
    let components = concept_components(graph, &records);
    let mut sizes: Vec<usize> = components
        .iter()
        .map(|members| {
            members
                .iter()
                .map(|&m| records[m].content_hash.as_str())
                .collect::<HashSet<_>>()
                .len()
        })
        .collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    let n_singletons = sizes.iter().filter(|&&s| s == 1).count();
    let multi_cluster_sizes: Vec<usize> = sizes.iter().copied().filter(|&s| s > 1).collect();
    let n_components = components.len();
    Ok(EcosystemReport {
        n_skills,
        n_exact_dups: n_skills - n_after_exact_dedup,
        n_in_clone_pair,
        n_pairs: graph.edges().len(),
        n_cross_author_pairs,
        n_after_exact_dedup,
        n_components,
        inflation_ratio: if n_components == 0 { 1.0 } else { n_skills as f64 / n_components as f64 },
        n_singletons,
        n_multi_clusters: multi_cluster_sizes.len(),
        largest_cluster: sizes.first().copied().unwrap_or(0),
        multi_cluster_sizes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::CloneType;
    use crate::fusion::SimilarityProfile;
    use crate::graph::Edge;

    fn corpus(texts: &[(&str, &str)]) -> Corpus {
        Corpus::from_records(
            texts
                .iter()
                .enumerate()
                .map(|(i, (author, text))| SkillRecord::new(format!("s{i:02}"), *author, "", "", *text)),
        )
        .unwrap()
    }

    fn edge(a: usize, b: usize) -> Edge {
        let p = SimilarityProfile::new(0.8, 0.8, 0.8, true, true, true, 0.8, 0.8);
        Edge::new(&format!("s{a:02}"), &format!("s{b:02}"), 0.9, Some(CloneType::T3), p)
    }

    fn graph(c: &Corpus, edges: Vec<Edge>) -> CloneGraph {
        CloneGraph::new(c.records().iter().map(|r| r.id.clone()).collect(), edges).unwrap()
    }

    #[test]
    fn no_edges_no_duplicates() {
        let texts: Vec<String> = (0..10).map(|i| format!("doc {i}")).collect();
        let c = corpus(&texts.iter().map(|t| ("", t.as_str())).collect::<Vec<_>>());
        let r = ecosystem_report(&graph(&c, vec![]), &c).unwrap();
        assert_eq!(r.inflation_ratio, 1.0);
        assert_eq!(r.n_singletons, 10);
        assert_eq!(r.largest_cluster, 1);
    }

    #[test]
    fn one_family_of_four() {
        let texts: Vec<String> = (0..10).map(|i| format!("doc {i}")).collect();
        let c = corpus(&texts.iter().map(|t| ("", t.as_str())).collect::<Vec<_>>());
        let r = ecosystem_report(&graph(&c, vec![edge(0, 1), edge(1, 2), edge(2, 3)]), &c).unwrap();
        assert_eq!(r.n_components, 7);
        assert_eq!(r.inflation_ratio, 10.0 / 7.0);
        assert_eq!((r.n_singletons, r.n_multi_clusters, r.largest_cluster), (6, 1, 4));
        assert_eq!(r.n_in_clone_pair, 4);
    }

    #[test]
    fn duplicates_collapse_and_cross_author_counts() {
        let c = corpus(&[("ann", "same"), ("bob", "same"), ("ann", "other"), ("", "third"), ("cy", "fourth")]);
        // Exact duplicates without an edge still share a concept.
        let r = ecosystem_report(&graph(&c, vec![edge(2, 3), edge(2, 4), edge(0, 2)]), &c).unwrap();
        assert_eq!(r.n_exact_dups, 1);
        assert_eq!(r.n_after_exact_dedup, 4);
        assert_eq!(r.n_components, 1);
        assert_eq!(r.n_singletons + r.multi_cluster_sizes.iter().sum::<usize>(), r.n_after_exact_dedup);
        // Only s02-s04 has two known, different authors.
        assert_eq!(r.n_cross_author_pairs, 1);
    }

    #[test]
    fn mismatched_graph_rejected() {
        let c = corpus(&[("", "a"), ("", "b")]);
        let g = CloneGraph::new(vec!["s00".into()], vec![]).unwrap();
        assert!(ecosystem_report(&g, &c).is_err());
    }
}
