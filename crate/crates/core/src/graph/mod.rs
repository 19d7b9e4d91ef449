//! Ecosystem clone graph: candidate filtering, batch detection, inflation
//! and supersession analytics, and security-pattern propagation.

pub mod candidates;
pub mod detect;
pub mod dsu;
pub mod export;
pub mod report;
pub mod security;
pub mod superseded;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use candidates::{candidate_pairs, CandidateOptions};
pub use detect::{detect_all, detect_with_stats, score_pairs, DetectOptions, FilterStats};
pub use dsu::DisjointSets;
pub use report::{ecosystem_report, EcosystemReport};
pub use security::{propagate, security_scan, PatternSet, PropagationReport, SecurityCategory};
pub use superseded::{superseded_analysis, SupersededReport};

use crate::classify::CloneType;
use crate::error::{Error, Result};
use crate::fusion::SimilarityProfile;

/// One accepted clone relation. `id_a < id_b` lexicographically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id_a: String,
    pub id_b: String,
    pub probability: f64,
    /// `None` when no channel is present on both sides.
    pub clone_type: Option<CloneType>,
    pub profile: SimilarityProfile,
}

impl Edge {
    pub fn new(id_a: &str, id_b: &str, probability: f64, clone_type: Option<CloneType>, profile: SimilarityProfile) -> Self {
        let (a, b) = if id_a <= id_b { (id_a, id_b) } else { (id_b, id_a) };
        Edge {
            id_a: a.to_string(),
            id_b: b.to_string(),
            probability,
            clone_type,
            profile,
        }
    }
}

/// Undirected graph over skill ids with connected components.
#[derive(Debug, Clone)]
pub struct CloneGraph {
    nodes: Vec<String>,
    edges: Vec<Edge>,
    endpoints: Vec<(usize, usize)>,
    lookup: HashMap<(usize, usize), usize>,
    adjacency: Vec<Vec<usize>>,
    components: Vec<Vec<usize>>,
    component_of: Vec<usize>,
}

fn key(i: usize, j: usize) -> (usize, usize) {
    (i.min(j), i.max(j))
}

impl CloneGraph {
    /// Builds the graph, rejecting self-loops, unknown ids and repeated edges.
    /// Edges are stored sorted by `(id_a, id_b)`.
    pub fn new(nodes: Vec<String>, mut edges: Vec<Edge>) -> Result<Self> {
        let position: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        if position.len() != nodes.len() {
            return Err(Error::Argument("duplicate node id".into()));
        }
        for e in &mut edges {
            if e.id_a > e.id_b {
                std::mem::swap(&mut e.id_a, &mut e.id_b);
            }
        }
        edges.sort_by(|x, y| (&x.id_a, &x.id_b).cmp(&(&y.id_a, &y.id_b)));
        let mut endpoints = Vec::with_capacity(edges.len());
        let mut lookup = HashMap::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (k, e) in edges.iter().enumerate() {
            let resolve = |id: &str| position.get(id).copied().ok_or_else(|| Error::UnknownId(id.to_string()));
            let (i, j) = (resolve(&e.id_a)?, resolve(&e.id_b)?);
            if i == j {
                return Err(Error::Argument(format!("self-loop on {}", e.id_a)));
            }
            if lookup.insert(key(i, j), k).is_some() {
                return Err(Error::Argument(format!("repeated edge {} -- {}", e.id_a, e.id_b)));
            }
            endpoints.push((i, j));
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        adjacency.iter_mut().for_each(|a| a.sort_unstable());
        let mut graph = CloneGraph {
            nodes,
            edges,
            endpoints,
            lookup,
            adjacency,
            components: Vec::new(),
            component_of: Vec::new(),
        };
        graph.rebuild_components();
        Ok(graph)
    }

    fn rebuild_components(&mut self) {
        let mut sets = DisjointSets::new(self.nodes.len());
        for &(i, j) in &self.endpoints {
            sets.union(i, j);
        }
        self.components = sets.sets();
        self.component_of = vec![0; self.nodes.len()];
        for (c, members) in self.components.iter().enumerate() {
            for &m in members {
                self.component_of[m] = c;
            }
        }
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Node positions of each edge, aligned with [`CloneGraph::edges`].
    pub fn endpoints(&self) -> &[(usize, usize)] {
        &self.endpoints
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == id)
    }

    /// Same edge for `(i, j)` and `(j, i)`.
    pub fn edge(&self, i: usize, j: usize) -> Option<&Edge> {
        self.lookup.get(&key(i, j)).map(|&k| &self.edges[k])
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    /// Components ordered by smallest member, members ascending.
    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    pub fn component_of(&self, i: usize) -> usize {
        self.component_of[i]
    }

    /// Inserts an edge; returns false (and changes nothing) if it exists.
    pub fn add_edge(&mut self, edge: Edge) -> Result<bool> {
        let mut edges = std::mem::take(&mut self.edges);
        let (Some(i), Some(j)) = (self.position(&edge.id_a), self.position(&edge.id_b)) else {
            self.edges = edges;
            return Err(Error::UnknownId(format!("{} or {}", edge.id_a, edge.id_b)));
        };
        if self.lookup.contains_key(&key(i, j)) {
            self.edges = edges;
            return Ok(false);
        }
        edges.push(edge);
        *self = CloneGraph::new(std::mem::take(&mut self.nodes), edges)?;
        Ok(true)
    }
}
