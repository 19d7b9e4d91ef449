//! Clone-producing mutation operators.
//!
//! Every operator works on the raw text's segments so that untouched regions
//! survive byte for byte.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::OnceLock;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::classify::CloneType;
use crate::error::{Error, Result};
use crate::parser::{join_segments, split_segments, Segment, SegmentKind, SkillDocument};
use crate::seed;
use crate::text;

const SYNONYMS: &str = include_str!("../../resources/synonyms.txt");

/// Bidirectional synonym lookup built from the embedded table.
pub fn synonyms() -> &'static HashMap<String, String> {
    static TABLE: OnceLock<HashMap<String, String>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut map = HashMap::new();
        for line in SYNONYMS.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            if let (Some(a), Some(b)) = (parts.next(), parts.next()) {
                map.entry(a.to_string()).or_insert_with(|| b.to_string());
                map.entry(b.to_string()).or_insert_with(|| a.to_string());
            }
        }
        map
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MutationOp {
    #[serde(rename = "M1_rename")]
    M1Rename,
    #[serde(rename = "M2_paraphrase")]
    M2Paraphrase,
    #[serde(rename = "M3_code_strip")]
    M3CodeStrip,
    #[serde(rename = "M4_extend")]
    M4Extend,
    #[serde(rename = "M5_subset")]
    M5Subset,
    #[serde(rename = "M6_combine")]
    M6Combine,
    #[serde(rename = "M7_rewrite")]
    M7Rewrite,
}

impl MutationOp {
    pub const ALL: [MutationOp; 7] = [
        MutationOp::M1Rename,
        MutationOp::M2Paraphrase,
        MutationOp::M3CodeStrip,
        MutationOp::M4Extend,
        MutationOp::M5Subset,
        MutationOp::M6Combine,
        MutationOp::M7Rewrite,
    ];

    pub fn target_type(self) -> CloneType {
        match self {
            MutationOp::M1Rename => CloneType::T2,
            MutationOp::M2Paraphrase | MutationOp::M4Extend | MutationOp::M5Subset | MutationOp::M6Combine => {
                CloneType::T3
            }
            MutationOp::M3CodeStrip | MutationOp::M7Rewrite => CloneType::T4,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            MutationOp::M1Rename => "M1",
            MutationOp::M2Paraphrase => "M2",
            MutationOp::M3CodeStrip => "M3",
            MutationOp::M4Extend => "M4",
            MutationOp::M5Subset => "M5",
            MutationOp::M6Combine => "M6",
            MutationOp::M7Rewrite => "M7",
        }
    }

    /// Operators producing the given clone type.
    pub fn for_type(clone_type: CloneType) -> Vec<MutationOp> {
        MutationOp::ALL.into_iter().filter(|op| op.target_type() == clone_type).collect()
    }

    pub fn needs_partner(self) -> bool {
        self == MutationOp::M6Combine
    }
}

impl std::str::FromStr for MutationOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let head = s.split('_').next().unwrap_or("").to_ascii_uppercase();
        MutationOp::ALL
            .into_iter()
            .find(|op| op.code() == head)
            .ok_or_else(|| Error::Argument(format!("unknown mutation operator `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mutant {
    pub text: String,
    pub clone_type: CloneType,
}

/// Why an operator could not be applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skip(pub String);

impl std::fmt::Display for Skip {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn mutate(
    doc: &SkillDocument,
    op: MutationOp,
    seed_value: u64,
    partner: Option<&SkillDocument>,
) -> std::result::Result<Mutant, Skip> {
    let mut rng = seed::stream_rng(seed_value, op.code());
    let raw = &doc.record.raw_text;
    let text = match op {
        MutationOp::M1Rename => rename_identifiers(raw, &mut rng)?,
        MutationOp::M2Paraphrase => paraphrase(raw, 0.5, false, &mut rng)?,
        MutationOp::M3CodeStrip => strip_code(raw)?,
        MutationOp::M4Extend => extend(raw, &mut rng),
        MutationOp::M5Subset => subset(raw, &mut rng)?,
        MutationOp::M6Combine => {
            let partner = partner.ok_or_else(|| Skip("combination needs a partner skill".into()))?;
            combine(raw, &partner.record.raw_text)?
        }
        MutationOp::M7Rewrite => paraphrase(raw, 1.0, true, &mut rng)?,
    };
    if text == *raw {
        return Err(Skip(format!("{} left the text unchanged", op.code())));
    }
    Ok(Mutant {
        text,
        clone_type: op.target_type(),
    })
}

const KEYWORDS: &[&str] = &[
    // python
    "and", "as", "assert", "async", "await", "break", "class", "continue", "def", "del", "elif", "else", "except",
    "false", "finally", "for", "from", "global", "if", "import", "in", "is", "lambda", "none", "nonlocal", "not",
    "or", "pass", "raise", "return", "true", "try", "while", "with", "yield", "self", "print", "len", "range",
    "log", "info", "append",
    // javascript / typescript
    "const", "let", "var", "function", "new", "this", "null", "undefined", "typeof", "instanceof", "switch",
    "case", "default", "export", "interface", "type", "extends", "implements", "of", "catch", "throw", "length",
    "foreach", "console",
    // shell
    "echo", "do", "done", "then", "fi", "esac", "local", "grep", "list", "set",
    // sql
    "select", "where", "order", "by", "update", "create", "index", "on", "insert", "into", "values", "delete",
    "limit", "join", "group", "having", "table",
];

fn keywords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| KEYWORDS.iter().copied().collect())
}

/// Pronounceable replacement word, two or three syllables.
fn pseudo_word(rng: &mut ChaCha8Rng) -> String {
    const ONSETS: &[&str] = &["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "tr", "st"];
    const VOWELS: &[&str] = &["a", "e", "i", "o", "u"];
    let syllables = rng.random_range(2..=3);
    (0..syllables)
        .map(|_| format!("{}{}", ONSETS.choose(rng).unwrap(), VOWELS.choose(rng).unwrap()))
        .collect()
}

struct Renamer {
    parts: BTreeMap<String, String>,
    used: HashSet<String>,
}

impl Renamer {
    fn part(&mut self, part: &str, rng: &mut ChaCha8Rng) -> String {
        if let Some(p) = self.parts.get(part) {
            return p.clone();
        }
        let fresh = loop {
            let w = pseudo_word(rng);
            if !self.used.contains(&w) && !keywords().contains(w.as_str()) {
                break w;
            }
        };
        self.used.insert(fresh.clone());
        self.parts.insert(part.to_string(), fresh.clone());
        fresh
    }

    fn identifier(&mut self, ident: &str, rng: &mut ChaCha8Rng) -> String {
        let parts = text::split_identifier(ident);
        let renamed: Vec<String> = parts.iter().map(|p| self.part(p, rng)).collect();
        if ident.contains('_') {
            let joined = renamed.join("_");
            if ident.chars().filter(|c| c.is_alphabetic()).all(|c| c.is_uppercase()) {
                joined.to_uppercase()
            } else {
                joined
            }
        } else {
            let mut out = String::new();
            for (k, p) in renamed.iter().enumerate() {
                let upper_first = if k == 0 {
                    ident.chars().next().is_some_and(char::is_uppercase)
                } else {
                    true
                };
                if upper_first {
                    let mut cs = p.chars();
                    if let Some(c) = cs.next() {
                        out.extend(c.to_uppercase());
                        out.push_str(cs.as_str());
                    }
                } else {
                    out.push_str(p);
                }
            }
            if ident.len() > 1 && ident.chars().filter(|c| c.is_alphabetic()).all(|c| c.is_uppercase()) {
                out.to_uppercase()
            } else {
                out
            }
        }
    }
}

fn declaration_patterns() -> &'static [Regex] {
    static PATTERNS: OnceLock<Vec<Regex>> = OnceLock::new();
    PATTERNS.get_or_init(|| {
        [
            r"\b(?:def|function|class)\s+([A-Za-z_]\w*)",
            r"\b(?:const|let|var|local|export)\s+([A-Za-z_]\w*)",
            r"(?m)^\s*([A-Za-z_]\w*)\s*=[^=]",
            r"\bfor\s+([A-Za-z_]\w*)\s+in\b",
            r"\(\s*([A-Za-z_]\w*)\s*\)\s*=>",
        ]
        .iter()
        .map(|p| Regex::new(p).expect("static pattern"))
        .collect()
    })
}

/// Names a snippet defines itself: functions, classes, parameters,
/// assigned variables and loop variables.
pub fn declared_identifiers(body: &str) -> BTreeSet<String> {
    static PARAMS: OnceLock<Regex> = OnceLock::new();
    let params = PARAMS.get_or_init(|| Regex::new(r"\b(?:def|function)\s+[A-Za-z_]\w*\s*\(([^)]*)\)").expect("static pattern"));
    let mut names = BTreeSet::new();
    for pattern in declaration_patterns() {
        for cap in pattern.captures_iter(body) {
            names.insert(cap[1].to_string());
        }
    }
    for cap in params.captures_iter(body) {
        for param in cap[1].split(',') {
            let name: String = param
                .trim()
                .chars()
                .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
                .collect();
            if !name.is_empty() {
                names.insert(name);
            }
        }
    }
    names.retain(|n| n.len() >= 2 && !keywords().contains(n.to_ascii_lowercase().as_str()));
    names
}

fn rename_in_body(body: &str, declared: &BTreeSet<String>, renamer: &mut Renamer, rng: &mut ChaCha8Rng) -> String {
    let mut out = String::with_capacity(body.len());
    let chars: Vec<char> = body.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let ident: String = chars[start..i].iter().collect();
            let lower = ident.to_ascii_lowercase();
            if !declared.contains(&ident) || keywords().contains(lower.as_str()) || text::split_identifier(&ident).is_empty() {
                out.push_str(&ident);
            } else {
                out.push_str(&renamer.identifier(&ident, rng));
            }
        } else if c.is_ascii_digit() {
            // Numbers and identifier tails stay as they are.
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                out.push(chars[i]);
                i += 1;
            }
        } else {
            out.push(c);
            i += 1;
        }
    }
    out
}

fn rename_identifiers(raw: &str, rng: &mut ChaCha8Rng) -> std::result::Result<String, Skip> {
    let mut segments = split_segments(raw);
    if !segments.iter().any(|s| s.kind == SegmentKind::Code) {
        return Err(Skip("identifier renaming needs at least one code block".into()));
    }
    let declared: BTreeSet<String> = segments
        .iter()
        .filter(|s| s.kind == SegmentKind::Code)
        .flat_map(|s| declared_identifiers(&s.text))
        .collect();
    if declared.is_empty() {
        return Err(Skip("code declares no identifiers to rename".into()));
    }
    let mut renamer = Renamer {
        parts: BTreeMap::new(),
        used: HashSet::new(),
    };
    for segment in segments.iter_mut().filter(|s| s.kind == SegmentKind::Code) {
        let mut lines: Vec<&str> = segment.text.split_inclusive('\n').collect();
        let fence_open = lines.remove(0).to_string();
        let closing = lines
            .last()
            .filter(|l| l.trim_start().starts_with(crate::parser::FENCE))
            .map(|l| l.to_string());
        if closing.is_some() {
            lines.pop();
        }
        let body = rename_in_body(&lines.concat(), &declared, &mut renamer, rng);
        segment.text = fence_open + &body + closing.as_deref().unwrap_or("");
    }
    Ok(join_segments(&segments))
}

fn line_ending(line: &str) -> &str {
    let trimmed = line.trim_end_matches(['\n', '\r']);
    &line[trimmed.len()..]
}

/// Splits prose into sentences ending at `.`, `!` or `?` followed by a space.
pub fn sentences(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        current.push(c);
        if matches!(c, '.' | '!' | '?') && chars.peek().is_none_or(|n| n.is_whitespace()) {
            out.push(current.trim().to_string());
            current.clear();
        }
    }
    if !current.trim().is_empty() {
        out.push(current.trim().to_string());
    }
    out
}

fn replace_synonyms(sentence: &str, probability: f64, rng: &mut ChaCha8Rng) -> String {
    let table = synonyms();
    let mut out = String::with_capacity(sentence.len());
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut String, rng: &mut ChaCha8Rng| {
        if word.is_empty() {
            return;
        }
        let lower = word.to_lowercase();
        match table.get(&lower) {
            Some(syn) if probability >= 1.0 || rng.random_bool(probability) => {
                if word.chars().next().is_some_and(char::is_uppercase) {
                    let mut cs = syn.chars();
                    if let Some(c) = cs.next() {
                        out.extend(c.to_uppercase());
                        out.push_str(cs.as_str());
                    }
                } else {
                    out.push_str(syn);
                }
            }
            _ => out.push_str(word),
        }
        word.clear();
    };
    for c in sentence.chars() {
        if c.is_alphabetic() {
            word.push(c);
        } else {
            flush(&mut word, &mut out, rng);
            out.push(c);
        }
    }
    flush(&mut word, &mut out, rng);
    out
}

fn is_prose(segment: &Segment) -> bool {
    segment.kind == SegmentKind::Nl && !segment.is_header() && !segment.text.trim().is_empty()
}

/// Synonym replacement plus deletion of 30% of NL sentences. A rewrite also
/// shuffles the surviving sentences within each section and substitutes
/// synonyms in headers and the frontmatter description.
fn paraphrase(raw: &str, probability: f64, rewrite: bool, rng: &mut ChaCha8Rng) -> std::result::Result<String, Skip> {
    let segments = split_segments(raw);
    let per_line: Vec<Vec<String>> = segments
        .iter()
        .map(|s| if is_prose(s) { sentences(&s.text) } else { Vec::new() })
        .collect();
    let total: usize = per_line.iter().map(Vec::len).sum();
    if total < 2 {
        return Err(Skip("paraphrase needs at least two NL sentences".into()));
    }
    let n_delete = ((total as f64) * 0.3).round() as usize;
    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(rng);
    let deleted: HashSet<usize> = order.into_iter().take(n_delete.min(total - 1)).collect();

    let mut kept: Vec<Vec<String>> = Vec::with_capacity(segments.len());
    let mut k = 0;
    for line in &per_line {
        let mut survivors = Vec::new();
        for s in line {
            if !deleted.contains(&k) {
                survivors.push(replace_synonyms(s, probability, rng));
            }
            k += 1;
        }
        kept.push(survivors);
    }

    if rewrite {
        // Shuffle sentences among the prose lines of each section.
        let mut start = 0;
        while start < segments.len() {
            let mut end = start + 1;
            while end < segments.len() && !segments[end].is_header() {
                end += 1;
            }
            let mut pool: Vec<String> = kept[start..end].iter().flatten().cloned().collect();
            pool.shuffle(rng);
            let mut it = pool.into_iter();
            for line in &mut kept[start..end] {
                let n = line.len();
                *line = it.by_ref().take(n).collect();
            }
            start = end;
        }
    }

    let mut out = String::with_capacity(raw.len());
    for ((segment, original), survivors) in segments.iter().zip(&per_line).zip(&kept) {
        if original.is_empty() {
            if !rewrite {
                out.push_str(&segment.text);
            } else if segment.is_header() {
                out.push_str(&replace_synonyms(&segment.text, 1.0, rng));
            } else if segment.kind == SegmentKind::Frontmatter {
                out.push_str(&rewrite_description(&segment.text, rng));
            } else {
                out.push_str(&segment.text);
            }
        } else if !survivors.is_empty() {
            out.push_str(&survivors.join(" "));
            out.push_str(line_ending(&segment.text));
        }
    }
    Ok(out)
}

fn rewrite_description(frontmatter: &str, rng: &mut ChaCha8Rng) -> String {
    frontmatter
        .split_inclusive('\n')
        .map(|line| match line.strip_prefix("description:") {
            Some(value) => format!("description:{}", replace_synonyms(value, 1.0, rng)),
            None => line.to_string(),
        })
        .collect()
}

fn strip_code(raw: &str) -> std::result::Result<String, Skip> {
    let segments = split_segments(raw);
    if !segments.iter().any(|s| s.kind == SegmentKind::Code) {
        return Err(Skip("code stripping needs at least one code block".into()));
    }
    let mut out = String::new();
    for segment in &segments {
        match segment.kind {
            SegmentKind::Frontmatter => out.push_str(&segment.text),
            _ if segment.is_header() => {
                if !out.is_empty() && !out.ends_with("\n\n") {
                    out.push('\n');
                }
                out.push_str(segment.text.trim_end());
                out.push('\n');
            }
            _ => {}
        }
    }
    Ok(out)
}

const FILLER_TITLES: &[&str] = &[
    "Troubleshooting", "Further Reading", "Notes", "Limitations", "Changelog", "FAQ", "Related Skills",
    "Acknowledgements", "Known Issues", "Contributing",
];

const FILLER_SENTENCES: &[&str] = &[
    "Open an issue if something does not work as described.",
    "Contributions and suggestions are welcome.",
    "This section will be expanded in a future release.",
    "Check the project page for the latest updates.",
    "Feedback from users helps improve this guide.",
    "Results may vary depending on your local setup.",
    "Keep your tools up to date to avoid surprises.",
    "See the official documentation for more background.",
    "Thanks to everyone who reported problems and ideas.",
    "Some edge cases are not covered yet.",
    "Run the steps again after upgrading dependencies.",
    "Please read the license before redistributing.",
];

fn extend(raw: &str, rng: &mut ChaCha8Rng) -> String {
    let mut out = raw.to_string();
    if !out.ends_with('\n') {
        out.push('\n');
    }
    let n = rng.random_range(1..=3);
    for title in FILLER_TITLES.choose_multiple(rng, n) {
        out.push_str(&format!("\n## {title}\n\n"));
        let k = rng.random_range(2..=4);
        let body: Vec<&str> = FILLER_SENTENCES.choose_multiple(rng, k).copied().collect();
        out.push_str(&body.join(" "));
        out.push('\n');
    }
    out
}

/// Frontmatter text and body sections, each section starting at a header.
/// Whitespace-only runs are attached to the following section.
fn sections(raw: &str) -> (String, Vec<String>) {
    let segments = split_segments(raw);
    let mut frontmatter = String::new();
    let mut sections: Vec<String> = Vec::new();
    let mut current = String::new();
    for segment in segments {
        if segment.kind == SegmentKind::Frontmatter {
            frontmatter = segment.text;
            continue;
        }
        if segment.is_header() && !current.trim().is_empty() {
            sections.push(std::mem::take(&mut current));
        }
        current.push_str(&segment.text);
    }
    if !current.trim().is_empty() {
        sections.push(current);
    } else if let Some(last) = sections.last_mut() {
        last.push_str(&current);
    }
    (frontmatter, sections)
}

fn subset(raw: &str, rng: &mut ChaCha8Rng) -> std::result::Result<String, Skip> {
    let (frontmatter, sections) = sections(raw);
    if sections.len() < 2 {
        return Err(Skip("subset needs at least two sections".into()));
    }
    let keep = sections.len() / 2;
    let start = rng.random_range(0..=sections.len() - keep);
    Ok(frontmatter + &sections[start..start + keep].concat())
}

fn combine(raw: &str, partner: &str) -> std::result::Result<String, Skip> {
    let (_, theirs) = sections(partner);
    if theirs.len() < 2 {
        return Err(Skip("combination partner needs at least two sections".into()));
    }
    let mut out = raw.to_string();
    if !out.ends_with('\n') {
        out.push('\n');
    }
    out.push('\n');
    out.push_str(&theirs[theirs.len() / 2..].concat());
    Ok(out)
}
