//! File formats for graphs and reports.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::report::EcosystemReport;
use super::security::PropagationReport;
use super::{CloneGraph, Edge};
use crate::error::{Error, Result};

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_text(text: &str, path: &Path) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_edges_jsonl(graph: &CloneGraph, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    for edge in graph.edges() {
        serde_json::to_writer(&mut out, edge)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_edges_jsonl(path: &Path) -> Result<Vec<Edge>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut edges = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        edges.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: n + 1,
            message: e.to_string(),
        })?);
    }
    Ok(edges)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentEntry {
    pub size: usize,
    pub members: Vec<String>,
}

/// Edge-connectivity components; singletons are only counted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub n_nodes: usize,
    pub n_edges: usize,
    pub n_components: usize,
    pub n_singletons: usize,
    pub components: Vec<ComponentEntry>,
}

pub fn component_summary(graph: &CloneGraph) -> ComponentSummary {
    let mut components: Vec<ComponentEntry> = graph
        .components()
        .iter()
        .filter(|c| c.len() > 1)
        .map(|c| ComponentEntry {
            size: c.len(),
            members: c.iter().map(|&i| graph.nodes()[i].clone()).collect(),
        })
        .collect();
    components.sort_by(|a, b| b.size.cmp(&a.size).then_with(|| a.members.cmp(&b.members)));
    ComponentSummary {
        n_nodes: graph.nodes().len(),
        n_edges: graph.edges().len(),
        n_components: graph.components().len(),
        n_singletons: graph.components().iter().filter(|c| c.len() == 1).count(),
        components,
    }
}

/// Two-column `Metric,Value` table.
pub fn ecosystem_csv(report: &EcosystemReport) -> String {
    let pct = |k: usize| {
        if report.n_skills == 0 {
            0.0
        } else {
            100.0 * k as f64 / report.n_skills as f64
        }
    };
    let rows: [(&str, String); 10] = [
        ("Total skills", report.n_skills.to_string()),
        ("Exact duplicates", report.n_exact_dups.to_string()),
        ("After exact dedup", report.n_after_exact_dedup.to_string()),
        ("Clone pairs detected", report.n_pairs.to_string()),
        ("Cross-author pairs", report.n_cross_author_pairs.to_string()),
        (
            "Skills in a clone pair",
            format!("{} ({:.1}%)", report.n_in_clone_pair, pct(report.n_in_clone_pair)),
        ),
        ("Unique skill concepts (components)", report.n_components.to_string()),
        ("Ecosystem inflation ratio", format!("{:.2}", report.inflation_ratio)),
        ("Singletons", report.n_singletons.to_string()),
        (
            "Multi-skill clusters",
            format!("{} (largest {})", report.n_multi_clusters, report.largest_cluster),
        ),
    ];
    let mut out = String::from("Metric,Value\n");
    for (metric, value) in rows {
        let _ = writeln!(out, "{metric},\"{value}\"");
    }
    out
}

/// `Category,Seeds,Clones,Cross-Auth.,Prop.` plus a total row.
pub fn propagation_csv(report: &PropagationReport) -> String {
    let mut out = String::from("Category,Seeds,Clones,Cross-Auth.,Prop.\n");
    let mut total = [0usize; 4];
    for row in &report.rows {
        let cells = [row.seeds, row.clones, row.cross_author, row.propagated];
        for (t, c) in total.iter_mut().zip(cells) {
            *t += c;
        }
        let _ = writeln!(out, "{},{},{},{},{}", row.category, cells[0], cells[1], cells[2], cells[3]);
    }
    let _ = writeln!(out, "total,{},{},{},{}", total[0], total[1], total[2], total[3]);
    out
}
