//! Java-aware tokenization of method bodies and comments.
//!
//! Identifiers are split following Java naming conventions: an all-caps run
//! that precedes a capitalized word is its own token (`SQLDatabase` becomes
//! `sql database`), capitalized or lowercase words are extracted next, and any
//! remaining all-caps run is kept whole. Every other ASCII symbol becomes a
//! standalone token so that brackets and parentheses survive preprocessing.

use serde::{Deserialize, Serialize};

/// Where a token sequence came from. Comments get their markers stripped
/// before tokenization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Code,
    Comment,
}

/// An ordered list of normalized tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
    pub origin: Origin,
}

impl TokenSequence {
    pub fn new(tokens: Vec<String>, origin: Origin) -> Self {
        Self { tokens, origin }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.tokens.iter()
    }

    /// Space-joined form, e.g. `public void send message ( view view )`.
    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Replaces `\n`, `\r` and `\t` with spaces, collapses space runs and trims.
pub fn normalize_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for ch in text.chars() {
        if matches!(ch, '\n' | '\r' | '\t' | ' ') {
            pending_space = true;
            continue;
        }
        if pending_space && !out.is_empty() {
            out.push(' ');
        }
        pending_space = false;
        out.push(ch);
    }
    out
}

/// Splits one identifier into lowercase subtokens.
///
/// Underscores separate parts and are dropped, digit runs are their own
/// tokens, and parts containing non-ASCII characters are lowercased but not
/// split further. A word without any alphabetic character is returned as is.
pub fn split_identifier(word: &str) -> Vec<String> {
    if !word.chars().any(char::is_alphabetic) {
        return vec![word.to_string()];
    }
    let mut out = Vec::new();
    for part in word.split('_').filter(|p| !p.is_empty()) {
        if !part.is_ascii() {
            out.push(part.to_lowercase());
            continue;
        }
        split_ascii_part(part.as_bytes(), &mut out);
    }
    out
}

fn split_ascii_part(bytes: &[u8], out: &mut Vec<String>) {
    let mut start = 0;
    while start < bytes.len() {
        let is_digit = bytes[start].is_ascii_digit();
        let mut end = start;
        while end < bytes.len()
            && bytes[end].is_ascii_digit() == is_digit
            && bytes[end].is_ascii_alphanumeric()
        {
            end += 1;
        }
        if end == start {
            // Non-alphanumeric ASCII inside an identifier: keep it standalone.
            out.push((bytes[start] as char).to_string());
            start += 1;
            continue;
        }
        let run = &bytes[start..end];
        if is_digit {
            out.push(String::from_utf8_lossy(run).into_owned());
        } else {
            split_camel(run, out);
        }
        start = end;
    }
}

/// Camel-case split of a run of ASCII letters.
fn split_camel(run: &[u8], out: &mut Vec<String>) {
    let lower = |s: &[u8]| String::from_utf8_lossy(s).to_ascii_lowercase();
    let n = run.len();
    let mut i = 0;
    while i < n {
        if run[i].is_ascii_lowercase() {
            let mut j = i;
            while j < n && run[j].is_ascii_lowercase() {
                j += 1;
            }
            out.push(lower(&run[i..j]));
            i = j;
            continue;
        }
        let mut caps_end = i;
        while caps_end < n && run[caps_end].is_ascii_uppercase() {
            caps_end += 1;
        }
        if caps_end == n {
            out.push(lower(&run[i..caps_end]));
            i = caps_end;
        } else if caps_end - i >= 2 {
            // All-caps run before a capitalized word: its last capital starts
            // the next word.
            out.push(lower(&run[i..caps_end - 1]));
            i = caps_end - 1;
        } else {
            let mut j = caps_end;
            while j < n && run[j].is_ascii_lowercase() {
                j += 1;
            }
            out.push(lower(&run[i..j]));
            i = j;
        }
    }
}

fn strip_comment_markers(text: &str) -> String {
    let mut lines = Vec::new();
    for line in text.lines() {
        let line = line.replace("*/", " ");
        let mut rest = line.trim_start();
        loop {
            let before = rest;
            for marker in ["/**", "/*", "//"] {
                if let Some(stripped) = rest.strip_prefix(marker) {
                    rest = stripped;
                }
            }
            rest = rest.trim_start_matches(|c: char| c == '*' || c.is_whitespace());
            if rest == before {
                break;
            }
        }
        lines.push(rest.to_string());
    }
    lines.join("\n")
}

fn is_word_char(ch: char) -> bool {
    ch == '_' || ch.is_ascii_alphanumeric() || (!ch.is_ascii() && ch.is_alphanumeric())
}

/// Tokenizes raw code or a raw comment.
pub fn tokenize(text: &str, origin: Origin) -> TokenSequence {
    let stripped;
    let source = match origin {
        Origin::Comment => {
            stripped = strip_comment_markers(text);
            stripped.as_str()
        }
        Origin::Code => text,
    };
    let normalized = normalize_whitespace(source);
    let mut tokens = Vec::new();
    let mut word = String::new();
    for ch in normalized.chars() {
        if is_word_char(ch) {
            word.push(ch);
            continue;
        }
        if !word.is_empty() {
            tokens.extend(split_identifier(&word));
            word.clear();
        }
        if ch != ' ' && !ch.is_whitespace() {
            tokens.push(ch.to_lowercase().collect());
        }
    }
    if !word.is_empty() {
        tokens.extend(split_identifier(&word));
    }
    TokenSequence::new(tokens, origin)
}
