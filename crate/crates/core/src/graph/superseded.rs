use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::report::{aligned_records, concept_components};
use super::CloneGraph;
use crate::corpus::{Corpus, SkillRecord};
use crate::error::{Error, Result};
use crate::parser::parse_skill;
use crate::text;

pub const DEFAULT_SUBSET_FLOOR: f64 = 0.70;
pub const KEY_LINE_MIN_CHARS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberQuality {
    pub id: String,
    pub content_length: usize,
    pub nl_words: usize,
    pub code_blocks: usize,
    /// Mean of the three metrics, each min-max scaled within the family.
    pub composite: f64,
    /// Another member has a strictly higher composite.
    pub superseded: bool,
    /// Largest share of this skill's key lines found in one longer member.
    pub subset_fraction: f64,
    pub strict_subset: bool,
    pub subset_of: Option<String>,
}

/// Members ranked by composite (descending), ties by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Family {
    pub members: Vec<MemberQuality>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupersededReport {
    pub subset_floor: f64,
    pub n_families: usize,
    pub n_family_members: usize,
    pub n_superseded: usize,
    pub n_strict_subset: usize,
    pub families: Vec<Family>,
}

/// Non-empty lines, whitespace collapsed, at least 20 characters, deduplicated.
pub fn key_lines(raw: &str) -> BTreeSet<String> {
    raw.lines()
        .map(|l| l.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|l| l.chars().count() >= KEY_LINE_MIN_CHARS)
        .collect()
}

fn scale(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .map(|v| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
        .collect()
}

fn analyse_family(records: &[&SkillRecord], floor: f64) -> Family {
    let docs: Vec<_> = records.iter().map(|r| parse_skill((*r).clone())).collect();
    let lengths: Vec<usize> = records.iter().map(|r| r.raw_text.chars().count()).collect();
    let words: Vec<usize> = docs.iter().map(|d| text::words(&d.nl_body).len()).collect();
    let blocks: Vec<usize> = docs.iter().map(|d| d.code_blocks.len()).collect();
    let as_f64 = |v: &[usize]| v.iter().map(|&x| x as f64).collect::<Vec<_>>();
    let (sl, sw, sb) = (scale(&as_f64(&lengths)), scale(&as_f64(&words)), scale(&as_f64(&blocks)));
    let composite: Vec<f64> = (0..records.len()).map(|k| (sl[k] + sw[k] + sb[k]) / 3.0).collect();
    let best = composite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let keys: Vec<BTreeSet<String>> = records.iter().map(|r| key_lines(&r.raw_text)).collect();

    let mut members: Vec<MemberQuality> = (0..records.len())
        .map(|k| {
            let mut subset_fraction = 0.0;
            let mut subset_of = None;
            if !keys[k].is_empty() {
                for m in (0..records.len()).filter(|&m| lengths[m] > lengths[k]) {
                    let shared = keys[k].intersection(&keys[m]).count() as f64 / keys[k].len() as f64;
                    if shared > subset_fraction {
                        subset_fraction = shared;
                        subset_of = Some(records[m].id.clone());
                    }
                }
            }
            let strict_subset = subset_fraction > floor;
            MemberQuality {
                id: records[k].id.clone(),
                content_length: lengths[k],
                nl_words: words[k],
                code_blocks: blocks[k],
                composite: composite[k],
                superseded: composite[k] < best,
                subset_fraction,
                strict_subset,
                subset_of: if strict_subset { subset_of } else { None },
            }
        })
        .collect();
    members.sort_by(|a, b| b.composite.total_cmp(&a.composite).then_with(|| a.id.cmp(&b.id)));
    Family { members }
}

/// Ranks the members of every multi-skill component and flags superseded
/// skills and strict subsets of a longer member.
pub fn superseded_analysis(graph: &CloneGraph, corpus: &Corpus, subset_floor: f64) -> Result<SupersededReport> {
    if !(0.0..=1.0).contains(&subset_floor) {
        return Err(Error::Argument(format!("subset floor {subset_floor} outside [0, 1]")));
    }
    let records = aligned_records(graph, corpus)?;
    let families: Vec<Family> = concept_components(graph, &records)
        .into_iter()
        .filter(|c| c.len() > 1)
        .map(|c| {
            let members: Vec<&SkillRecord> = c.iter().map(|&i| records[i]).collect();
            analyse_family(&members, subset_floor)
        })
        .collect();
    let all = || families.iter().flat_map(|f| &f.members);
    Ok(SupersededReport {
        subset_floor,
        n_families: families.len(),
        n_family_members: all().count(),
        n_superseded: all().filter(|m| m.superseded).count(),
        n_strict_subset: all().filter(|m| m.strict_subset).count(),
        families,
    })
}
