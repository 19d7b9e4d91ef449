//! Tokenizers shared by the parser, the channel encoders and the baselines.

use std::collections::HashSet;
use std::sync::OnceLock;

use crate::parser::CodeBlock;

const STOPWORDS: &str = include_str!("../resources/stopwords.txt");

/// Operators kept as standalone code tokens.
pub const CODE_OPERATORS: [&str; 9] = ["|>", "=>", "->", "==", "!=", ">=", "<=", "&&", "||"];

pub fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        STOPWORDS
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

pub fn is_stopword(word: &str) -> bool {
    stopwords().contains(word)
}

/// Lowercased maximal alphanumeric runs.
pub fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// NL channel tokens: lowercased words with stopwords removed.
pub fn tokenize_nl(text: &str) -> Vec<String> {
    let mut tokens = words(text);
    tokens.retain(|w| !is_stopword(w));
    tokens
}

/// Flat whole-document tokens: lowercased words, stopwords kept.
pub fn tokenize_flat(text: &str) -> Vec<String> {
    words(text)
}

/// Tokens that count towards the boilerplate floor.
pub fn meaningful_token_count(text: &str) -> usize {
    tokenize_nl(text)
        .iter()
        .filter(|w| w.chars().count() >= 2)
        .count()
}

/// Lowercases, trims and maps common aliases to one canonical tag.
pub fn normalize_language(tag: &str) -> String {
    let tag = tag.trim().to_lowercase();
    let canonical = match tag.as_str() {
        "sh" | "shell" | "zsh" | "console" => "bash",
        "js" | "node" => "javascript",
        "py" | "python3" => "python",
        "ts" => "typescript",
        "yml" => "yaml",
        "rs" => "rust",
        "golang" => "go",
        "ps1" | "pwsh" => "powershell",
        _ => return tag,
    };
    canonical.to_string()
}

/// Splits an identifier on underscores and camelCase boundaries.
///
/// Acronym runs stay together (`HTTPServer` gives `http`, `server`).
pub fn split_identifier(ident: &str) -> Vec<String> {
    let mut parts = Vec::new();
    for piece in ident.split('_').filter(|p| !p.is_empty()) {
        let chars: Vec<char> = piece.chars().collect();
        let mut start = 0;
        for i in 1..chars.len() {
            let prev = chars[i - 1];
            let cur = chars[i];
            let next_lower = chars.get(i + 1).is_some_and(|c| c.is_lowercase());
            let boundary = (prev.is_lowercase() && cur.is_uppercase())
                || (prev.is_ascii_digit() && cur.is_uppercase())
                || (prev.is_uppercase() && cur.is_uppercase() && next_lower);
            if boundary {
                parts.push(chars[start..i].iter().collect::<String>().to_lowercase());
                start = i;
            }
        }
        parts.push(chars[start..].iter().collect::<String>().to_lowercase());
    }
    parts
}

/// Token stream of one code body, without the language tag.
pub fn code_body_tokens(body: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let bytes = body.as_bytes();
    let mut i = 0;
    while i < body.len() {
        let c = body[i..].chars().next().unwrap();
        if c.is_alphanumeric() || c == '_' {
            let start = i;
            while i < body.len() {
                let ch = body[i..].chars().next().unwrap();
                if ch.is_alphanumeric() || ch == '_' {
                    i += ch.len_utf8();
                } else {
                    break;
                }
            }
            tokens.extend(split_identifier(&body[start..i]));
            continue;
        }
        if i + 1 < bytes.len() {
            if let Some(op) = CODE_OPERATORS
                .iter()
                .find(|op| body.as_bytes()[i..].starts_with(op.as_bytes()))
            {
                tokens.push((*op).to_string());
                i += 2;
                continue;
            }
        }
        i += c.len_utf8();
    }
    tokens
}

pub fn language_token(language: &str) -> String {
    if language.is_empty() {
        "__lang_none__".to_string()
    } else {
        format!("__lang_{language}__")
    }
}

/// Code channel tokens: one language token per block, then its body tokens.
pub fn tokenize_code(blocks: &[CodeBlock]) -> Vec<String> {
    let mut tokens = Vec::new();
    for block in blocks {
        tokens.push(language_token(&block.language));
        tokens.extend(code_body_tokens(&block.body));
    }
    tokens
}
