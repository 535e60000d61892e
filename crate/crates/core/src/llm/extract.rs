use crate::dom::tokenizer::{tokenize, Token};
use crate::dom::{is_void, parse_fragment_nodes};

/// Text strictly between the first `start` marker and the next `end` marker
/// after it.
pub fn extract_marked(text: &str, start: &str, end: &str) -> Option<String> {
    if start.is_empty() || end.is_empty() {
        return None;
    }
    let from = text.find(start)? + start.len();
    let len = text[from..].find(end)?;
    Some(text[from..from + len].to_string())
}

/// Removes surrounding whitespace and one wrapping Markdown code fence.
pub fn strip_code_fence(code: &str) -> &str {
    let t = code.trim();
    let Some(rest) = t.strip_prefix("```") else {
        return t;
    };
    let Some(inner) = rest.strip_suffix("```") else {
        return t;
    };
    // Drop the info string (e.g. `html`) on the opening line.
    match inner.split_once('\n') {
        Some((info, body)) if !info.trim().contains('<') => body.trim(),
        _ => inner.trim(),
    }
}

/// The first run of markup in free text that parses to at least one element.
///
/// Scanning starts at each `<letter` in turn; the run ends at the first
/// non-blank text outside every open element.
pub fn extract_first_html(text: &str) -> Option<String> {
    let bytes = text.as_bytes();
    let mut i = 0;
    while i + 1 < bytes.len() {
        if bytes[i] == b'<' && bytes[i + 1].is_ascii_alphabetic() {
            if let Some(end) = markup_run_end(&text[i..]) {
                let candidate = text[i..i + end].trim_end();
                if parse_fragment_nodes(candidate).iter().any(|n| n.as_element().is_some()) {
                    return Some(candidate.to_string());
                }
            }
        }
        i += 1;
    }
    None
}

fn markup_run_end(src: &str) -> Option<usize> {
    let mut tok = tokenize(src);
    let mut stack: Vec<String> = Vec::new();
    let mut last_closed = None;
    let mut last_tag_end = None;
    let mut seen_element = false;
    while let Some(t) = tok.next() {
        match t {
            Token::StartTag { name, self_closing, .. } => {
                seen_element = true;
                if !(self_closing || is_void(&name)) {
                    stack.push(name);
                }
            }
            Token::EndTag(name) => {
                if let Some(pos) = stack.iter().rposition(|n| *n == name) {
                    stack.truncate(pos);
                }
            }
            Token::Text(t) => {
                if stack.is_empty() && !t.trim().is_empty() {
                    break;
                }
            }
            Token::Comment(_) | Token::Doctype(_) => {}
        }
        if !seen_element {
            return None;
        }
        last_tag_end = Some(tok.position());
        if stack.is_empty() {
            last_closed = Some(tok.position());
        }
    }
    last_closed.or(last_tag_end)
}
