//! Skill record ingestion and exact-duplicate fingerprints.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// One raw skill as ingested from a registry dump.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkillRecord {
    pub id: String,
    #[serde(default)]
    pub author: String,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub category: String,
    pub raw_text: String,
    /// Hex SHA-256 of `raw_text`. Always recomputed on ingestion.
    #[serde(default, skip_deserializing)]
    pub content_hash: String,
}

impl SkillRecord {
    pub fn new(
        id: impl Into<String>,
        author: impl Into<String>,
        name: impl Into<String>,
        category: impl Into<String>,
        raw_text: impl Into<String>,
    ) -> Self {
        let raw_text = raw_text.into();
        let content_hash = content_hash(&raw_text);
        SkillRecord {
            id: id.into(),
            author: author.into(),
            name: name.into(),
            category: category.into(),
            raw_text,
            content_hash,
        }
    }
}

pub fn content_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Whether two authors count as distinct people.
///
/// Empty authors are unknown: they are never the same author as anyone and
/// never a provably different one either, so both predicates return false.
pub fn same_author(a: &str, b: &str) -> bool {
    !a.is_empty() && !b.is_empty() && a == b
}

pub fn different_author(a: &str, b: &str) -> bool {
    !a.is_empty() && !b.is_empty() && a != b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadFormat {
    Jsonl,
    Directory,
}

impl std::str::FromStr for LoadFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(LoadFormat::Jsonl),
            "dir" | "directory" => Ok(LoadFormat::Directory),
            other => Err(Error::Argument(format!("unknown corpus format `{other}`"))),
        }
    }
}

/// An immutable, hashed collection of skill records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    records: Vec<SkillRecord>,
    by_hash: BTreeMap<String, Vec<String>>,
    positions: HashMap<String, usize>,
    dropped: usize,
}

/// A set of byte-identical records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DuplicateGroup {
    pub hash: String,
    pub ids: Vec<String>,
}

impl Corpus {
    /// Builds a corpus, hashing every record and dropping empty documents.
    ///
    /// Fails on duplicate ids.
    pub fn from_records(records: impl IntoIterator<Item = SkillRecord>) -> Result<Self> {
        let mut kept = Vec::new();
        let mut dropped = 0;
        let mut seen = std::collections::HashSet::new();
        for mut record in records {
            if record.raw_text.is_empty() {
                dropped += 1;
                continue;
            }
            if !seen.insert(record.id.clone()) {
                return Err(Error::Argument(format!("duplicate skill id `{}`", record.id)));
            }
            record.content_hash = content_hash(&record.raw_text);
            kept.push(record);
        }
        let mut by_hash: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for record in &kept {
            by_hash
                .entry(record.content_hash.clone())
                .or_default()
                .push(record.id.clone());
        }
        let positions = kept.iter().enumerate().map(|(i, r)| (r.id.clone(), i)).collect();
        Ok(Corpus {
            records: kept,
            by_hash,
            positions,
            dropped,
        })
    }

    pub fn records(&self) -> &[SkillRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Number of input records discarded because their text was empty.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    pub fn by_hash(&self) -> &BTreeMap<String, Vec<String>> {
        &self.by_hash
    }

    pub fn get(&self, id: &str) -> Option<&SkillRecord> {
        self.position(id).map(|i| &self.records[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.positions.get(id).copied()
    }

    pub fn into_records(self) -> Vec<SkillRecord> {
        self.records
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        write_records_jsonl(&self.records, path)
    }
}

pub fn write_records_jsonl(records: &[SkillRecord], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn load_corpus(path: &Path, format: LoadFormat) -> Result<Corpus> {
    match format {
        LoadFormat::Jsonl => load_jsonl(path),
        LoadFormat::Directory => load_directory(path),
    }
}

fn load_jsonl(path: &Path) -> Result<Corpus> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: SkillRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: n + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    let corpus = Corpus::from_records(records)?;
    if corpus.dropped > 0 {
        log::info!("dropped {} records with empty raw_text", corpus.dropped);
    }
    Ok(corpus)
}

fn load_directory(root: &Path) -> Result<Corpus> {
    if !root.is_dir() {
        return Err(Error::io(
            root,
            std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
        ));
    }
    let mut records = Vec::new();
    for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(root).to_path_buf();
            Error::io(path, e.into())
        })?;
        let path = entry.path();
        if !entry.file_type().is_file() || path.extension().and_then(|e| e.to_str()) != Some("md")
        {
            continue;
        }
        let raw_text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let relative = path.strip_prefix(root).unwrap_or(path);
        let id = relative
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        // SKILL.md files are named after their directory.
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        let name = match stem.as_deref() {
            Some("SKILL") | Some("skill") => path
                .parent()
                .and_then(|p| p.file_name())
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
            Some(s) => s.to_string(),
            None => String::new(),
        };
        records.push(SkillRecord::new(id, "", name, "", raw_text));
    }
    records.sort_by(|a, b| a.id.cmp(&b.id));
    Corpus::from_records(records)
}

/// Groups of two or more byte-identical records, sorted by hash, ids sorted.
pub fn exact_duplicates(corpus: &Corpus) -> Vec<DuplicateGroup> {
    corpus
        .by_hash
        .iter()
        .filter(|(_, ids)| ids.len() >= 2)
        .map(|(hash, ids)| {
            let mut ids = ids.clone();
            ids.sort();
            DuplicateGroup {
                hash: hash.clone(),
                ids,
            }
        })
        .collect()
}

/// Record count after keeping one representative per duplicate group.
pub fn deduplicated_count(corpus: &Corpus) -> usize {
    let removed: usize = exact_duplicates(corpus).iter().map(|g| g.ids.len() - 1).sum();
    corpus.len() - removed
}
