//! Minimal wikitext cleanup for article bodies.
//!
//! This is not a renderer. It truncates the article at the first terminal
//! section (external links, references, ...), drops templates and comments,
//! and unwraps link and emphasis markup so the remaining text reads as plain
//! prose.

/// Section titles that end the useful part of an article.
pub const DEFAULT_TERMINAL_SECTIONS: &[&str] = &[
    "External links",
    "References",
    "See also",
    "Further reading",
    "Notes",
    "Bibliography",
];

pub fn default_terminal_sections() -> Vec<String> {
    DEFAULT_TERMINAL_SECTIONS
        .iter()
        .map(|s| s.to_string())
        .collect()
}

/// Strips markup from raw wikitext and truncates at the first heading whose
/// title is one of `terminal_sections` (case-insensitive). Best effort,
/// never fails.
pub fn strip_article(wikitext: &str, terminal_sections: &[String]) -> String {
    let text = remove_html_comments(wikitext);
    let text = remove_templates(&text);
    let text = truncate_and_strip_headings(&text, terminal_sections);
    let text = unwrap_links(&text);
    let text = remove_quote_runs(&text);
    text.trim().to_string()
}

fn remove_html_comments(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find("<!--") {
        out.push_str(&rest[..start]);
        match rest[start + 4..].find("-->") {
            Some(end) => rest = &rest[start + 4 + end + 3..],
            None => return out, // unterminated comment swallows the tail
        }
    }
    out.push_str(rest);
    out
}

/// Removes `{{...}}` templates, tracking nesting depth.
fn remove_templates(text: &str) -> String {
    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut depth = 0usize;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'{' && i + 1 < bytes.len() && bytes[i + 1] == b'{' {
            depth += 1;
            i += 2;
        } else if depth > 0 && bytes[i] == b'}' && i + 1 < bytes.len() && bytes[i + 1] == b'}' {
            depth -= 1;
            i += 2;
        } else {
            if depth == 0 {
                // Safe: we only land on char boundaries because '{'/'}' are
                // single-byte and we otherwise copy whole chars.
                let ch_len = utf8_len(bytes[i]);
                out.push_str(&text[i..i + ch_len]);
                i += ch_len;
            } else {
                i += utf8_len(bytes[i]);
            }
        }
    }
    out
}

fn utf8_len(first_byte: u8) -> usize {
    match first_byte {
        b if b < 0x80 => 1,
        b if b >> 5 == 0b110 => 2,
        b if b >> 4 == 0b1110 => 3,
        _ => 4,
    }
}

/// A heading line like `== Title ==` (2 or more '='). Returns its title.
fn heading_title(line: &str) -> Option<&str> {
    let trimmed = line.trim();
    if !trimmed.starts_with("==") || !trimmed.ends_with("==") || trimmed.len() < 4 {
        return None;
    }
    let inner = trimmed
        .trim_start_matches('=')
        .trim_end_matches('=')
        .trim();
    if inner.is_empty() {
        None
    } else {
        Some(inner)
    }
}

fn truncate_and_strip_headings(text: &str, terminal_sections: &[String]) -> String {
    let mut out = String::with_capacity(text.len());
    for line in text.lines() {
        if let Some(title) = heading_title(line) {
            if terminal_sections
                .iter()
                .any(|t| t.eq_ignore_ascii_case(title))
            {
                break;
            }
            out.push_str(title);
            out.push('\n');
        } else {
            out.push_str(line);
            out.push('\n');
        }
    }
    out
}

/// `[[target|label]]` -> label, `[[target]]` -> target.
fn unwrap_links(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find("[[") {
        out.push_str(&rest[..start]);
        match rest[start + 2..].find("]]") {
            Some(end) => {
                let inner = &rest[start + 2..start + 2 + end];
                let shown = match inner.rsplit_once('|') {
                    Some((_, label)) => label,
                    None => inner,
                };
                out.push_str(shown);
                rest = &rest[start + 2 + end + 2..];
            }
            None => {
                out.push_str(&rest[start..]);
                return out;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Removes bold/italic quote runs ('' and longer).
fn remove_quote_runs(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '\'' && chars.peek() == Some(&'\'') {
            while chars.peek() == Some(&'\'') {
                chars.next();
            }
        } else {
            out.push(c);
        }
    }
    out
}
