//! Deterministic synthetic skill corpus.
//!
//! Documents are assembled from per-category vocabularies so that skills of the
//! same category overlap moderately and skills of different categories share
//! only generic wording. A configurable fraction of skills are forks (layout
//! edits of an earlier skill by another author) or byte-identical copies.

use std::sync::OnceLock;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::SkillRecord;
use crate::error::{Error, Result};
use crate::seed;

const VOCAB: &str = include_str!("../../resources/synth_vocab.txt");

#[derive(Debug, Clone)]
pub struct CategoryVocab {
    pub name: String,
    pub languages: Vec<String>,
    pub words: Vec<String>,
    pub code_parts: Vec<String>,
}

pub fn categories() -> &'static [CategoryVocab] {
    static CATEGORIES: OnceLock<Vec<CategoryVocab>> = OnceLock::new();
    CATEGORIES.get_or_init(|| {
        VOCAB
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|line| {
                let fields: Vec<&str> = line.split('|').map(str::trim).collect();
                let split = |s: &str| s.split_whitespace().map(String::from).collect::<Vec<_>>();
                CategoryVocab {
                    name: fields[0].to_string(),
                    languages: fields[1].split(',').map(|s| s.trim().to_string()).collect(),
                    words: split(fields[2]),
                    code_parts: split(fields[3]),
                }
            })
            .collect()
    })
}

const VERBS: &[&str] = &[
    "create", "build", "run", "start", "stop", "check", "test", "find", "search", "get", "fetch", "send", "read",
    "write", "update", "change", "remove", "add", "insert", "show", "list", "use", "open", "close", "review",
    "analyze", "measure", "convert", "generate", "extract", "parse", "combine", "split", "sort", "filter",
    "handle", "track", "monitor", "explain", "describe", "define", "include", "keep", "save", "load", "export",
    "install", "configure", "deploy", "connect", "enable", "prepare", "organize", "collect", "share", "schedule",
    "retry", "skip", "fix", "improve", "reduce", "clean", "reset", "verify", "compare", "calculate",
];
const NOUNS: &[&str] = &[
    "result", "output", "input", "value", "number", "total", "part", "section", "step", "task", "goal", "method",
    "tool", "option", "setting", "limit", "range", "size", "format", "type", "group", "item", "example", "rule",
    "guide", "note", "warning", "detail", "summary", "request", "response", "message", "user", "project",
    "plan", "feature", "function", "command", "action", "process", "workflow", "system", "service", "resource",
    "path", "folder", "file", "page", "line", "content", "source", "target", "version", "report", "status",
    "access", "quality", "environment", "structure", "pattern", "error", "problem",
];
const ADJECTIVES: &[&str] = &[
    "new", "large", "small", "important", "common", "correct", "valid", "clear", "complete", "main", "extra",
    "single", "multiple", "first", "last", "next", "previous", "partial", "wrong", "old",
];
const ADVERBS: &[&str] = &[
    "quickly", "carefully", "directly", "automatically", "safely", "usually", "often", "always", "properly",
    "exactly", "mostly", "again", "later", "first",
];
const PREPOSITIONS: &[&str] = &["before", "after", "during", "inside", "across", "around", "within", "through"];

const SENTENCE_TEMPLATES: &[&str] = &[
    "{V} the {D} {N} before you {v} the {D}.",
    "Always {v} each {D} {N} {P} the {D} {N}.",
    "This {N} helps you {v} {D} and {D} {A}.",
    "Use the {D} {N} to {v} the {J} {D} {N} {A}.",
    "If the {D} {N} is {J}, {v} the {D} first.",
    "{V} {D} {N} {P} the {D} {N} to {v} the {D}.",
    "The {J} {D} {N} should {v} every {D} {A}.",
    "You can {v} the {D} with the {D} {N}.",
    "{V} the {D} and {v} the {J} {N} {A}.",
    "Remember to {v} {D} {N} {P} each {D}.",
];

const SECTION_TITLES: &[&str] = &[
    "Usage", "Overview", "Steps", "Examples", "Configuration", "Workflow", "Details", "Setup", "Reference",
    "Best Practices", "Validation", "Output",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_skills: usize,
    pub n_authors: usize,
    /// Fraction of skills that are layout-edited forks of an earlier skill.
    pub fork_rate: f64,
    /// Fraction of skills that are byte-identical copies of an earlier skill.
    pub duplicate_rate: f64,
    pub no_code_rate: f64,
    pub no_frontmatter_rate: f64,
    /// Domain words each skill draws its sentences from.
    pub focus_words: usize,
    /// Invented words unique to each skill, shared by its prose and code.
    pub private_words: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_skills: 200,
            n_authors: 40,
            fork_rate: 0.10,
            duplicate_rate: 0.02,
            no_code_rate: 0.10,
            no_frontmatter_rate: 0.03,
            focus_words: 10,
            private_words: 4,
            seed: 0,
        }
    }
}

/// Provenance of one generated skill.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    Original,
    Fork { of: String },
    Duplicate { of: String },
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub records: Vec<SkillRecord>,
    pub origins: Vec<Origin>,
}

impl SynthCorpus {
    /// Fork relationships as `(original, fork)` id pairs.
    pub fn fork_pairs(&self) -> Vec<(String, String)> {
        self.records
            .iter()
            .zip(&self.origins)
            .filter_map(|(r, o)| match o {
                Origin::Fork { of } => Some((of.clone(), r.id.clone())),
                _ => None,
            })
            .collect()
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &'a [&'a str]) -> &'a str {
    pool.choose(rng).copied().unwrap_or("")
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn sentence(rng: &mut ChaCha8Rng, focus: &[String]) -> String {
    let template = pick(rng, SENTENCE_TEMPLATES);
    let mut out = String::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let close = open + rest[open..].find('}').expect("template braces are balanced");
        let slot = &rest[open + 1..close];
        let word = match slot {
            "V" => capitalize(pick(rng, VERBS)),
            "v" => pick(rng, VERBS).to_string(),
            "N" => pick(rng, NOUNS).to_string(),
            "J" => pick(rng, ADJECTIVES).to_string(),
            "A" => pick(rng, ADVERBS).to_string(),
            "P" => pick(rng, PREPOSITIONS).to_string(),
            "D" => focus.choose(rng).cloned().unwrap_or_default(),
            other => unreachable!("unknown template slot {other}"),
        };
        out.push_str(&word);
        rest = &rest[close + 1..];
    }
    out.push_str(rest);
    out
}

fn paragraph(rng: &mut ChaCha8Rng, focus: &[String], sentences: usize) -> String {
    (0..sentences).map(|_| sentence(rng, focus)).collect::<Vec<_>>().join(" ")
}

const CODE_VERBS: &[&str] = &["get", "load", "fetch", "build", "parse", "check", "make", "run", "send", "read", "write", "update", "list", "sync"];

fn ident_parts(rng: &mut ChaCha8Rng, parts: &[String]) -> (String, String) {
    let verb = pick(rng, CODE_VERBS).to_string();
    let noun = parts.choose(rng).cloned().unwrap_or_else(|| "item".into());
    (verb, noun)
}

fn snake(rng: &mut ChaCha8Rng, parts: &[String]) -> String {
    let (v, n) = ident_parts(rng, parts);
    format!("{v}_{n}")
}

fn camel(rng: &mut ChaCha8Rng, parts: &[String]) -> String {
    let (v, n) = ident_parts(rng, parts);
    format!("{v}{}", capitalize(&n))
}

fn noun(rng: &mut ChaCha8Rng, parts: &[String]) -> String {
    parts.choose(rng).cloned().unwrap_or_else(|| "item".into())
}

fn code_body(rng: &mut ChaCha8Rng, language: &str, parts: &[String]) -> String {
    let lines = rng.random_range(4..=8);
    let mut out = Vec::new();
    match language {
        "python" => {
            out.push(format!("def {}({}, {}=None):", snake(rng, parts), noun(rng, parts), noun(rng, parts)));
            for _ in 0..lines {
                let line = match rng.random_range(0..5) {
                    0 => format!("    {} = {}.{}({})", noun(rng, parts), noun(rng, parts), snake(rng, parts), noun(rng, parts)),
                    1 => format!("    for {} in {}({}):", noun(rng, parts), snake(rng, parts), noun(rng, parts)),
                    2 => format!("    if {} is None or {} > {}:", noun(rng, parts), noun(rng, parts), rng.random_range(1..100)),
                    3 => format!("    {}.append({}({}))", noun(rng, parts), snake(rng, parts), noun(rng, parts)),
                    _ => format!("    log.info(\"{} %s\", {})", noun(rng, parts), noun(rng, parts)),
                };
                out.push(line);
            }
            out.push(format!("    return {}", noun(rng, parts)));
        }
        "javascript" | "typescript" => {
            out.push(format!("async function {}({}, {}) {{", camel(rng, parts), noun(rng, parts), noun(rng, parts)));
            for _ in 0..lines {
                let line = match rng.random_range(0..4) {
                    0 => format!("  const {} = await {}.{}({});", noun(rng, parts), noun(rng, parts), camel(rng, parts), noun(rng, parts)),
                    1 => format!("  if ({} && {}.length > {}) {{ {}({}); }}", noun(rng, parts), noun(rng, parts), rng.random_range(0..10), camel(rng, parts), noun(rng, parts)),
                    2 => format!("  {}.forEach(({}) => {}({}));", noun(rng, parts), noun(rng, parts), camel(rng, parts), noun(rng, parts)),
                    _ => format!("  let {} = {{ {}: {}, {}: {} }};", camel(rng, parts), noun(rng, parts), rng.random_range(0..50), noun(rng, parts), noun(rng, parts)),
                };
                out.push(line);
            }
            out.push(format!("  return {};", noun(rng, parts)));
            out.push("}".into());
        }
        "sql" => {
            for _ in 0..lines.min(4) {
                let line = match rng.random_range(0..3) {
                    0 => format!(
                        "SELECT {}, {} FROM {} WHERE {} = :{} ORDER BY {};",
                        noun(rng, parts), noun(rng, parts), snake(rng, parts), noun(rng, parts), noun(rng, parts), noun(rng, parts)
                    ),
                    1 => format!("UPDATE {} SET {} = {} WHERE {} > {};", snake(rng, parts), noun(rng, parts), rng.random_range(0..9), noun(rng, parts), rng.random_range(0..99)),
                    _ => format!("CREATE INDEX {} ON {} ({});", snake(rng, parts), noun(rng, parts), noun(rng, parts)),
                };
                out.push(line);
            }
        }
        "yaml" => {
            out.push(format!("{}:", noun(rng, parts)));
            for _ in 0..lines {
                out.push(format!("  {}: {}", snake(rng, parts), rng.random_range(0..500)));
            }
        }
        _ => {
            for _ in 0..lines {
                let line = match rng.random_range(0..4) {
                    0 => format!("{} {} --{} \"${}\"", noun(rng, parts), pick(rng, CODE_VERBS), noun(rng, parts), noun(rng, parts).to_uppercase()),
                    1 => format!("for {} in $({} list); do {} \"${}\"; done", noun(rng, parts), noun(rng, parts), snake(rng, parts), noun(rng, parts)),
                    2 => format!("export {}={}", snake(rng, parts).to_uppercase(), rng.random_range(0..100)),
                    _ => format!("{} {} | grep {} > {}.log", noun(rng, parts), pick(rng, CODE_VERBS), noun(rng, parts), snake(rng, parts)),
                };
                out.push(line);
            }
        }
    }
    out.join("\n")
}

const SYLLABLES: &[&str] = &[
    "ka", "lo", "mir", "ve", "dro", "sen", "tal", "qu", "ix", "bra", "nel", "zo", "fen", "ru", "pax", "or", "tem", "vy", "gal", "sho",
];

/// Pronounceable nonsense word of three or four syllables.
fn pseudo_word(rng: &mut ChaCha8Rng) -> String {
    (0..rng.random_range(3..=4)).map(|_| pick(rng, SYLLABLES)).collect()
}

fn skill_text(rng: &mut ChaCha8Rng, category: &CategoryVocab, index: usize, config: &SynthConfig) -> (String, String) {
    let mut focus: Vec<String> = category.words.choose_multiple(rng, config.focus_words.max(1)).cloned().collect();
    focus.sort();
    let private: Vec<String> = (0..config.private_words).map(|_| pseudo_word(rng)).collect();
    focus.extend(private.iter().cloned());
    let mut code_parts = category.code_parts.clone();
    code_parts.extend(private);
    let name = format!("{}-{}-{:04}", category.name, focus[0].replace(' ', "-"), index);
    let mut text = String::new();
    if !rng.random_bool(config.no_frontmatter_rate.clamp(0.0, 1.0)) {
        let mut tags: Vec<&String> = focus.choose_multiple(rng, 3).collect();
        tags.sort();
        text.push_str("---\n");
        text.push_str(&format!("name: {name}\n"));
        text.push_str(&format!("description: {}\n", sentence(rng, &focus).trim_end_matches('.')));
        text.push_str(&format!("category: {}\n", category.name));
        text.push_str(&format!(
            "tags: [{}]\n",
            tags.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(", ")
        ));
        text.push_str("---\n\n");
    }
    text.push_str(&format!("# {}\n\n", capitalize(&name.replace('-', " "))));
    let intro = rng.random_range(2..=3);
    text.push_str(&paragraph(rng, &focus, intro));
    text.push_str("\n\n");

    let with_code = !rng.random_bool(config.no_code_rate.clamp(0.0, 1.0));
    let n_sections = rng.random_range(3..=5);
    let n_blocks = if with_code { rng.random_range(1..=3) } else { 0 };
    let mut titles: Vec<&str> = SECTION_TITLES.choose_multiple(rng, n_sections).copied().collect();
    titles.shuffle(rng);
    for (s, title) in titles.iter().enumerate() {
        text.push_str(&format!("## {title}\n\n"));
        for _ in 0..rng.random_range(1..=2) {
            let n = rng.random_range(2..=4);
            text.push_str(&paragraph(rng, &focus, n));
            text.push_str("\n\n");
        }
        if s < n_blocks {
            let language = category.languages.choose(rng).cloned().unwrap_or_default();
            text.push_str(&format!("```{language}\n{}\n```\n\n", code_body(rng, &language, &code_parts)));
        }
    }
    (name, text.trim_end().to_string() + "\n")
}

/// Rewrites whitespace and line layout without touching any token.
pub fn layout_edit(raw: &str, rng: &mut ChaCha8Rng) -> String {
    let mut out = String::with_capacity(raw.len() + 64);
    let mut in_code = false;
    let mut frontmatter = raw.starts_with("---\n");
    for (n, line) in raw.lines().enumerate() {
        if line.trim_start().starts_with("```") {
            in_code = !in_code;
        }
        if frontmatter {
            out.push_str(line);
            out.push('\n');
            if n > 0 && line == "---" {
                frontmatter = false;
            }
            continue;
        }
        if in_code || line.trim().is_empty() {
            out.push_str(line);
        } else {
            // Re-wrap prose at sentence boundaries and pad some lines.
            out.push_str(&line.replace(". ", if rng.random_bool(0.5) { ".\n" } else { ".  " }));
            if rng.random_bool(0.3) {
                out.push(' ');
            }
        }
        out.push('\n');
        if !in_code && line.trim().is_empty() && rng.random_bool(0.2) {
            out.push('\n');
        }
    }
    if out == raw {
        out.push('\n');
    }
    out
}

pub fn generate(config: &SynthConfig) -> Result<SynthCorpus> {
    if config.n_skills == 0 || config.n_authors == 0 {
        return Err(Error::Argument("synthetic corpus needs at least one skill and one author".into()));
    }
    for (name, rate) in [
        ("fork_rate", config.fork_rate),
        ("duplicate_rate", config.duplicate_rate),
        ("no_code_rate", config.no_code_rate),
        ("no_frontmatter_rate", config.no_frontmatter_rate),
    ] {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::Argument(format!("{name} = {rate} outside [0, 1]")));
        }
    }
    let cats = categories();
    let mut rng = seed::stream_rng(config.seed, "synth");
    let mut records: Vec<SkillRecord> = Vec::with_capacity(config.n_skills);
    let mut origins = Vec::with_capacity(config.n_skills);
    let mut originals: Vec<usize> = Vec::new();
    let mut author_of: Vec<usize> = Vec::with_capacity(config.n_skills);
    let author = |k: usize| format!("author-{:03}", k);

    for i in 0..config.n_skills {
        let id = format!("skill-{i:05}");
        let roll: f64 = rng.random();
        if !originals.is_empty() && roll < config.duplicate_rate {
            let src = &records[*originals.choose(&mut rng).expect("nonempty")];
            let k = rng.random_range(0..config.n_authors);
            author_of.push(k);
            let record = SkillRecord::new(
                id,
                author(k),
                src.name.clone(),
                src.category.clone(),
                src.raw_text.clone(),
            );
            origins.push(Origin::Duplicate { of: src.id.clone() });
            records.push(record);
        } else if !originals.is_empty() && roll < config.duplicate_rate + config.fork_rate {
            let src_pos = *originals.choose(&mut rng).expect("nonempty");
            let src = records[src_pos].clone();
            let text = layout_edit(&src.raw_text, &mut rng);
            // Forks always change hands.
            let mut k = rng.random_range(0..config.n_authors);
            if k == author_of[src_pos] && config.n_authors > 1 {
                k = (k + 1) % config.n_authors;
            }
            author_of.push(k);
            records.push(SkillRecord::new(id, author(k), src.name.clone(), src.category.clone(), text));
            origins.push(Origin::Fork { of: src.id });
        } else {
            let category = &cats[i % cats.len()];
            let (name, text) = skill_text(&mut rng, category, i, config);
            let k = rng.random_range(0..config.n_authors);
            author_of.push(k);
            records.push(SkillRecord::new(
                id,
                author(k),
                name,
                category.name.clone(),
                text,
            ));
            origins.push(Origin::Original);
            originals.push(i);
        }
    }
    Ok(SynthCorpus { records, origins })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_skill;
    use crate::text;

    #[test]
    fn vocabulary_resource_is_well_formed() {
        let cats = categories();
        assert!(cats.len() >= 10);
        for c in cats {
            assert!(c.words.len() >= 30, "{}", c.name);
            assert!(c.code_parts.len() >= 10, "{}", c.name);
            assert!(!c.languages.is_empty());
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = SynthConfig { n_skills: 40, seed: 5, ..Default::default() };
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a.records, b.records);
        assert_ne!(a.records, generate(&SynthConfig { seed: 6, ..cfg }).unwrap().records);
    }

    #[test]
    fn skills_parse_into_all_channels() {
        let corpus = generate(&SynthConfig { n_skills: 60, no_code_rate: 0.0, no_frontmatter_rate: 0.0, ..Default::default() }).unwrap();
        for (record, origin) in corpus.records.iter().zip(&corpus.origins) {
            let doc = parse_skill(record.clone());
            assert!(doc.frontmatter, "{}", record.id);
            assert_eq!(doc.yaml.len(), 4);
            assert!(!doc.code_blocks.is_empty());
            assert!(text::meaningful_token_count(&doc.nl_body) >= 20);
            if let Origin::Duplicate { of } = origin {
                assert_eq!(corpus.records.iter().find(|r| &r.id == of).unwrap().raw_text, record.raw_text);
            }
        }
    }

    #[test]
    fn forks_keep_tokens_but_not_bytes() {
        let corpus = generate(&SynthConfig { n_skills: 80, fork_rate: 0.3, ..Default::default() }).unwrap();
        let forks = corpus.fork_pairs();
        assert!(!forks.is_empty());
        for (a, b) in forks {
            let ra = corpus.records.iter().find(|r| r.id == a).unwrap();
            let rb = corpus.records.iter().find(|r| r.id == b).unwrap();
            assert_ne!(ra.raw_text, rb.raw_text);
            assert_ne!(ra.author, rb.author);
            assert_eq!(text::tokenize_flat(&ra.raw_text), text::tokenize_flat(&rb.raw_text));
            let (da, db) = (parse_skill(ra.clone()), parse_skill(rb.clone()));
            assert_eq!(da.code_blocks, db.code_blocks);
            assert_eq!(da.yaml, db.yaml);
        }
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(generate(&SynthConfig { fork_rate: 1.5, ..Default::default() }).is_err());
        assert!(generate(&SynthConfig { n_skills: 0, ..Default::default() }).is_err());
    }
}
