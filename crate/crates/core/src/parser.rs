//! Decomposition of a skill into frontmatter, NL body, code blocks and
//! structural features.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::corpus::SkillRecord;
use crate::error::{Error, Result};
use crate::text;

pub const FENCE: &str = "```";
pub const FRONTMATTER_DELIMITER: &str = "---";

/// Number of structural features per document.
pub const N_STRUCTURAL: usize = 8;

pub const STRUCTURAL_NAMES: [&str; N_STRUCTURAL] = [
    "word_count",
    "code_block_count",
    "code_to_text_ratio",
    "avg_code_block_len",
    "unique_language_count",
    "has_frontmatter",
    "yaml_field_count",
    "description_len",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum YamlValue {
    Scalar(String),
    List(Vec<String>),
}

impl YamlValue {
    /// Space-joined text of the value.
    pub fn text(&self) -> String {
        match self {
            YamlValue::Scalar(s) => s.clone(),
            YamlValue::List(items) => items.join(" "),
        }
    }
}

pub type YamlMap = IndexMap<String, YamlValue>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeBlock {
    /// Normalized lowercase tag, empty when the fence had no info string.
    pub language: String,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkillDocument {
    pub record: SkillRecord,
    pub yaml: YamlMap,
    /// True when both frontmatter delimiters were found.
    pub frontmatter: bool,
    pub nl_body: String,
    pub code_blocks: Vec<CodeBlock>,
    pub features_raw: [f64; N_STRUCTURAL],
}

impl SkillDocument {
    pub fn id(&self) -> &str {
        &self.record.id
    }

    pub fn description(&self) -> String {
        self.yaml.get("description").map(YamlValue::text).unwrap_or_default()
    }
}

/// Min-max normalized structural features, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructuralFeatures(pub [f64; N_STRUCTURAL]);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    Frontmatter,
    Nl,
    Code,
}

/// A contiguous slice of the raw text. Concatenating all segments of a
/// document reproduces it byte for byte.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub kind: SegmentKind,
    pub text: String,
}

impl Segment {
    fn new(kind: SegmentKind, text: &str) -> Self {
        Segment {
            kind,
            text: text.to_string(),
        }
    }

    /// Markdown header line (`#`, `##`, ...).
    pub fn is_header(&self) -> bool {
        self.kind == SegmentKind::Nl && self.text.trim_start().starts_with('#')
    }
}

fn strip_eol(line: &str) -> &str {
    line.trim_end_matches(['\n', '\r'])
}

fn is_fence(line: &str) -> bool {
    line.trim_start().starts_with(FENCE)
}

/// Splits raw text into frontmatter, one segment per NL line, and one
/// segment per fenced block (fence lines included).
pub fn split_segments(raw: &str) -> Vec<Segment> {
    let lines: Vec<&str> = raw.split_inclusive('\n').collect();
    let mut segments = Vec::new();
    let mut i = 0;

    if lines.first().is_some_and(|l| strip_eol(l) == FRONTMATTER_DELIMITER) {
        if let Some(close) = (1..lines.len()).find(|&k| strip_eol(lines[k]).trim_end() == FRONTMATTER_DELIMITER) {
            segments.push(Segment::new(SegmentKind::Frontmatter, &lines[..=close].concat()));
            i = close + 1;
        }
    }

    while i < lines.len() {
        if is_fence(lines[i]) {
            let close = (i + 1..lines.len()).find(|&k| is_fence(lines[k]));
            let end = close.unwrap_or(lines.len() - 1);
            segments.push(Segment::new(SegmentKind::Code, &lines[i..=end].concat()));
            i = end + 1;
        } else {
            segments.push(Segment::new(SegmentKind::Nl, lines[i]));
            i += 1;
        }
    }
    segments
}

pub fn join_segments(segments: &[Segment]) -> String {
    segments.iter().map(|s| s.text.as_str()).collect()
}

/// Language tag and body of a code segment.
pub fn code_block_of(segment_text: &str) -> CodeBlock {
    let mut lines: Vec<&str> = segment_text.split_inclusive('\n').collect();
    let opening = lines.remove(0);
    let info = opening.trim_start().trim_start_matches('`').trim();
    let language = text::normalize_language(info.split_whitespace().next().unwrap_or(""));
    if lines.last().is_some_and(|l| is_fence(l)) {
        lines.pop();
    }
    let body = lines.concat();
    let body = body.strip_suffix('\n').unwrap_or(&body);
    let body = body.strip_suffix('\r').unwrap_or(body);
    CodeBlock {
        language,
        body: body.to_string(),
    }
}

fn frontmatter_content(segment_text: &str) -> String {
    let lines: Vec<&str> = segment_text.split_inclusive('\n').collect();
    lines[1..lines.len() - 1].concat()
}

fn scalar_text(value: &serde_yaml::Value) -> String {
    use serde_yaml::Value;
    match value {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        Value::Tagged(t) => scalar_text(&t.value),
        Value::Sequence(items) => items.iter().map(scalar_text).collect::<Vec<_>>().join(" "),
        Value::Mapping(map) => map
            .iter()
            .map(|(k, v)| format!("{} {}", scalar_text(k), scalar_text(v)))
            .collect::<Vec<_>>()
            .join(" "),
    }
}

fn parse_yaml(content: &str) -> std::result::Result<YamlMap, String> {
    use serde_yaml::Value;
    let value: Value = serde_yaml::from_str(content).map_err(|e| e.to_string())?;
    let mapping = match value {
        Value::Null => return Ok(YamlMap::new()),
        Value::Mapping(m) => m,
        _ => return Err("frontmatter is not a key/value mapping".to_string()),
    };
    let mut out = YamlMap::new();
    for (key, value) in mapping {
        let key = scalar_text(&key);
        let value = match value {
            Value::Sequence(items) => YamlValue::List(items.iter().map(scalar_text).collect()),
            Value::Mapping(map) => YamlValue::List(
                map.iter()
                    .map(|(k, v)| format!("{} {}", scalar_text(k), scalar_text(v)))
                    .collect(),
            ),
            other => YamlValue::Scalar(scalar_text(&other)),
        };
        out.insert(key, value);
    }
    Ok(out)
}

/// Decomposes one record. Never fails: malformed YAML yields an empty map.
pub fn parse_skill(record: SkillRecord) -> SkillDocument {
    let segments = split_segments(&record.raw_text);
    let mut yaml = YamlMap::new();
    let mut frontmatter = false;
    let mut nl_lines = String::new();
    let mut code_blocks = Vec::new();

    for segment in &segments {
        match segment.kind {
            SegmentKind::Frontmatter => {
                frontmatter = true;
                match parse_yaml(&frontmatter_content(&segment.text)) {
                    Ok(map) => yaml = map,
                    Err(e) => log::warn!("skill {}: unparseable frontmatter: {e}", record.id),
                }
            }
            SegmentKind::Nl => nl_lines.push_str(&segment.text.replace(FENCE, "")),
            SegmentKind::Code => code_blocks.push(code_block_of(&segment.text)),
        }
    }

    let nl_body = nl_lines.trim().to_string();
    let features_raw = raw_features(&record.raw_text, &yaml, frontmatter, &code_blocks);
    SkillDocument {
        record,
        yaml,
        frontmatter,
        nl_body,
        code_blocks,
        features_raw,
    }
}

fn raw_features(raw: &str, yaml: &YamlMap, frontmatter: bool, blocks: &[CodeBlock]) -> [f64; N_STRUCTURAL] {
    let code_bytes: usize = blocks.iter().map(|b| b.body.len()).sum();
    let ratio = if raw.is_empty() {
        0.0
    } else {
        (code_bytes as f64 / raw.len() as f64).min(1.0)
    };
    let avg_len = if blocks.is_empty() {
        0.0
    } else {
        code_bytes as f64 / blocks.len() as f64
    };
    let languages: std::collections::BTreeSet<&str> = blocks
        .iter()
        .map(|b| b.language.as_str())
        .filter(|l| !l.is_empty())
        .collect();
    let description_len = yaml
        .get("description")
        .map(|d| d.text().chars().count())
        .unwrap_or(0);
    [
        raw.split_whitespace().count() as f64,
        blocks.len() as f64,
        ratio,
        avg_len,
        languages.len() as f64,
        if frontmatter { 1.0 } else { 0.0 },
        yaml.len() as f64,
        description_len as f64,
    ]
}

/// Drops documents with fewer than five meaningful tokens across the NL body
/// and the YAML description. Returns `(kept, dropped)`.
pub fn filter_boilerplate(docs: Vec<SkillDocument>) -> (Vec<SkillDocument>, Vec<SkillDocument>) {
    docs.into_iter().partition(|doc| {
        text::meaningful_token_count(&doc.nl_body) + text::meaningful_token_count(&doc.description()) >= 5
    })
}

/// Corpus-wide min-max normalization of the raw structural features.
pub fn normalize_features(docs: &[SkillDocument]) -> Result<Vec<StructuralFeatures>> {
    let raw: Vec<[f64; N_STRUCTURAL]> = docs.iter().map(|d| d.features_raw).collect();
    normalize_raw(&raw)
}

pub fn normalize_raw(raw: &[[f64; N_STRUCTURAL]]) -> Result<Vec<StructuralFeatures>> {
    if raw.is_empty() {
        return Err(Error::Argument("cannot normalize features of an empty corpus".into()));
    }
    let mut lo = [f64::INFINITY; N_STRUCTURAL];
    let mut hi = [f64::NEG_INFINITY; N_STRUCTURAL];
    for row in raw {
        for k in 0..N_STRUCTURAL {
            lo[k] = lo[k].min(row[k]);
            hi[k] = hi[k].max(row[k]);
        }
    }
    Ok(raw
        .iter()
        .map(|row| {
            let mut out = [0.0; N_STRUCTURAL];
            for k in 0..N_STRUCTURAL {
                let range = hi[k] - lo[k];
                out[k] = if range > 0.0 {
                    ((row[k] - lo[k]) / range).clamp(0.0, 1.0)
                } else {
                    0.0
                };
            }
            StructuralFeatures(out)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(text: &str) -> SkillDocument {
        parse_skill(SkillRecord::new("t", "", "", "", text))
    }

    #[test]
    fn decomposes_minimal_skill() {
        let d = doc("---\nname: pdf\n---\nExtract text.\n```python\nprint(1)\n```");
        assert_eq!(d.yaml.len(), 1);
        assert_eq!(d.yaml["name"], YamlValue::Scalar("pdf".into()));
        assert_eq!(d.nl_body, "Extract text.");
        assert_eq!(
            d.code_blocks,
            vec![CodeBlock {
                language: "python".into(),
                body: "print(1)".into()
            }]
        );
        assert_eq!(d.features_raw[5], 1.0);
    }

    #[test]
    fn plain_text_is_all_body() {
        let d = doc("Just some instructions here.\nSecond line.");
        assert!(d.yaml.is_empty());
        assert!(d.code_blocks.is_empty());
        assert!(!d.frontmatter);
        assert_eq!(d.nl_body, "Just some instructions here.\nSecond line.");
    }

    #[test]
    fn unclosed_frontmatter_is_body() {
        let d = doc("---\nname: x\nbody without close");
        assert!(!d.frontmatter);
        assert!(d.yaml.is_empty());
        assert!(d.nl_body.contains("name: x"));
    }

    #[test]
    fn malformed_yaml_is_not_fatal() {
        let d = doc("---\nname: [unclosed\n---\nBody text.");
        assert!(d.frontmatter);
        assert!(d.yaml.is_empty());
        assert_eq!(d.nl_body, "Body text.");
        assert_eq!(d.features_raw[5], 1.0);
    }

    #[test]
    fn yaml_lists_and_numbers() {
        let d = doc("---\nname: k8s\ntags: [a, b]\nversion: 2\ndescription: Deploy pods\n---\nx");
        assert_eq!(d.yaml["tags"], YamlValue::List(vec!["a".into(), "b".into()]));
        assert_eq!(d.yaml["version"], YamlValue::Scalar("2".into()));
        assert_eq!(d.features_raw[6], 4.0);
        assert_eq!(d.features_raw[7], "Deploy pods".len() as f64);
    }

    #[test]
    fn fences_with_aliases_and_indentation() {
        let d = doc("Intro\n  ```SH\n  ls -la\n  ```\n```\nplain\n```\n```js extra\nx\n```\nOutro");
        let langs: Vec<_> = d.code_blocks.iter().map(|b| b.language.as_str()).collect();
        assert_eq!(langs, ["bash", "", "javascript"]);
        assert_eq!(d.code_blocks[0].body, "  ls -la");
        assert_eq!(d.nl_body, "Intro\nOutro");
        assert_eq!(d.features_raw[1], 3.0);
        assert_eq!(d.features_raw[4], 2.0);
    }

    #[test]
    fn unclosed_fence_runs_to_end() {
        let d = doc("Text\n```python\nx = 1\ny = 2\n");
        assert_eq!(d.code_blocks.len(), 1);
        assert_eq!(d.code_blocks[0].body, "x = 1\ny = 2");
        assert_eq!(d.nl_body, "Text");
    }

    #[test]
    fn code_heavy_document_ratio() {
        // 26 blocks, half of the bytes inside fences: the shape of a
        // methodology skill whose examples dominate the text.
        let mut text = String::from("---\nname: idor-testing\ndescription: IDOR methodology\n---\n");
        let prose = "Check whether object identifiers can be swapped between accounts.\n";
        let code = "curl -s -H \"Authorization: Bearer $TOKEN\" https://api/x/1\n";
        for _ in 0..26 {
            text.push_str(prose);
            text.push_str("```bash\n");
            text.push_str(code);
            text.push_str("```\n");
        }
        let d = doc(&text);
        assert_eq!(d.code_blocks.len(), 26);
        assert_eq!(d.features_raw[1], 26.0);
        let ratio = d.features_raw[2];
        assert!((0.0..=1.0).contains(&ratio));
        let expected = (26 * (code.len() - 1)) as f64 / text.len() as f64;
        assert!((ratio - expected).abs() < 1e-12);
    }

    #[test]
    fn boilerplate_partition() {
        let docs = vec![
            doc("the a of to"),
            doc("Parse invoices, extract totals, validate currency codes."),
            doc("---\ndescription: Deploy helm charts safely\n---\nrun it now"),
            doc("hi"),
        ];
        let (kept, dropped) = filter_boilerplate(docs);
        assert_eq!(kept.len() + dropped.len(), 4);
        assert_eq!(kept.len(), 2);
        assert!(dropped.iter().any(|d| d.record.raw_text == "the a of to"));
    }

    #[test]
    fn normalization_rules() {
        let raw = |w: f64| {
            let mut r = [0.0; N_STRUCTURAL];
            r[0] = w;
            r
        };
        let single = normalize_raw(&[raw(100.0)]).unwrap();
        assert_eq!(single[0].0, [0.0; N_STRUCTURAL]);

        let two = normalize_raw(&[raw(100.0), raw(300.0)]).unwrap();
        assert_eq!((two[0].0[0], two[1].0[0]), (0.0, 1.0));

        let three = normalize_raw(&[raw(100.0), raw(200.0), raw(300.0)]).unwrap();
        assert_eq!(three.iter().map(|f| f.0[0]).collect::<Vec<_>>(), [0.0, 0.5, 1.0]);
        assert!(three.iter().all(|f| f.0[1..].iter().all(|&v| v == 0.0)));

        assert!(matches!(normalize_raw(&[]), Err(Error::Argument(_))));
    }

    fn nonspace(s: &str) -> usize {
        s.chars().filter(|c| !c.is_whitespace()).count()
    }

    fn skill_text() -> impl Strategy<Value = String> {
        let line = prop_oneof![
            "[a-zA-Z ]{0,20}".prop_map(|s| s),
            Just("---".to_string()),
            Just("```python".to_string()),
            Just("```".to_string()),
            Just("# Header".to_string()),
            Just("name: demo".to_string()),
            "[a-z]{1,5}: [a-z ]{0,10}".prop_map(|s| s),
        ];
        proptest::collection::vec(line, 0..25).prop_map(|lines| lines.join("\n"))
    }

    proptest! {
        #[test]
        fn segments_reassemble_exactly(text in skill_text()) {
            prop_assert_eq!(join_segments(&split_segments(&text)), text);
        }

        #[test]
        fn decomposition_accounts_for_every_character(text in skill_text()) {
            let d = doc(&text);
            prop_assert!(!d.nl_body.lines().any(|l| l.trim_start().starts_with(FENCE)));
            prop_assert!(!d.nl_body.contains(FENCE));
            prop_assert_eq!(d.features_raw[1], d.code_blocks.len() as f64);
            prop_assert!((0.0..=1.0).contains(&d.features_raw[2]));
            prop_assert_eq!(d.features_raw[5] == 1.0, d.frontmatter || !d.yaml.is_empty());

            // Non-whitespace characters are either NL body, code body,
            // frontmatter content, or part of a delimiter line.
            let mut accounted = nonspace(&d.nl_body);
            let mut delimiters = 0;
            for seg in split_segments(&text) {
                match seg.kind {
                    SegmentKind::Frontmatter => accounted += nonspace(&seg.text),
                    SegmentKind::Code => {
                        let block = code_block_of(&seg.text);
                        accounted += nonspace(&block.body);
                        delimiters += nonspace(&seg.text) - nonspace(&block.body);
                    }
                    SegmentKind::Nl => delimiters += nonspace(&seg.text) - nonspace(&seg.text.replace(FENCE, "")),
                }
            }
            prop_assert_eq!(accounted + delimiters, nonspace(&text));
        }

        #[test]
        fn parse_is_deterministic(text in skill_text()) {
            prop_assert_eq!(doc(&text), doc(&text));
        }
    }
}
