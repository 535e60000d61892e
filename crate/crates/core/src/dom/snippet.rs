//! Canonical snippet form and grounding of snippets against a document.
//!
//! The canonical form re-emits the token stream with attributes sorted,
//! ASCII whitespace collapsed, comments dropped and self-closing non-void
//! tags expanded. Matching is substring containment on that form.

use serde::{Deserialize, Serialize};

use super::entities::escape_text;
use super::serialize::write_start_tag;
use super::tokenizer::{raw_text_kind, tokenize, Token};
use super::{is_void, Document, Element, Node, NodeKind, NodePath, NodeRef};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HtmlSnippet {
    pub text: String,
    pub normalized: String,
}

impl HtmlSnippet {
    pub fn new(text: impl Into<String>) -> Self {
        let text = text.into();
        let normalized = normalize(&text);
        Self { text, normalized }
    }
}

fn collapse_ws(s: &str) -> String {
    s.split_ascii_whitespace().collect::<Vec<_>>().join(" ")
}

fn push_text(t: &str, raw: bool, out: &mut String) {
    let collapsed = collapse_ws(t);
    if raw {
        out.push_str(&collapsed);
    } else {
        escape_text(&collapsed, out);
    }
}

/// Canonical form of an HTML string. Idempotent.
pub fn normalize(html: &str) -> String {
    let mut out = String::new();
    let mut in_raw = false;
    for token in tokenize(html) {
        let was_raw = std::mem::replace(&mut in_raw, false);
        match token {
            Token::StartTag {
                name,
                attrs,
                self_closing,
            } => {
                let void = is_void(&name);
                let el = Element { name, attrs };
                write_start_tag(&el, &mut out);
                if self_closing && !void {
                    out.push_str("</");
                    out.push_str(&el.name);
                    out.push('>');
                } else if !self_closing {
                    in_raw = raw_text_kind(&el.name) == Some(false);
                }
            }
            Token::EndTag(name) if !is_void(&name) => {
                out.push_str("</");
                out.push_str(&name);
                out.push('>');
            }
            Token::Text(t) => push_text(&t, was_raw, &mut out),
            Token::EndTag(_) | Token::Comment(_) | Token::Doctype(_) => {}
        }
    }
    out
}

/// Canonical form of a parsed subtree, equal to `normalize(node.to_html())`
/// but computed without re-tokenizing.
pub(crate) fn normalize_node(node: &Node) -> String {
    let mut out = String::new();
    write_norm(node, false, &mut out);
    out
}

fn write_norm(node: &Node, raw_parent: bool, out: &mut String) {
    match &node.kind {
        NodeKind::Document => {
            for c in &node.children {
                write_norm(c, false, out);
            }
        }
        NodeKind::Element(el) => {
            write_start_tag(el, out);
            if is_void(&el.name) {
                return;
            }
            let raw = raw_text_kind(&el.name) == Some(false);
            for c in &node.children {
                write_norm(c, raw, out);
            }
            out.push_str("</");
            out.push_str(&el.name);
            out.push('>');
        }
        NodeKind::Text(t) => push_text(t, raw_parent, out),
        NodeKind::Comment(_) | NodeKind::Doctype(_) => {}
    }
}

/// Returns the first minimal element whose canonical form contains the
/// snippet's canonical form: it contains the snippet and none of its child
/// elements does.
pub fn find_segment(doc: &Document, snippet: &HtmlSnippet) -> Option<NodeRef> {
    let needle = snippet.normalized.as_str();
    if needle.is_empty() {
        return None;
    }
    let mut node = doc.root();
    let mut path = NodePath::root();
    if !normalize_node(node).contains(needle) {
        return None;
    }
    'descend: loop {
        for (i, child) in node.children.iter().enumerate() {
            if child.as_element().is_some() && normalize_node(child).contains(needle) {
                node = child;
                path = path.child(i);
                continue 'descend;
            }
        }
        break;
    }
    if path.0.is_empty() {
        // Snippet spans several top-level nodes; no single element holds it.
        return None;
    }
    doc.node_ref(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::parse_document;

    #[test]
    fn canonical_form() {
        assert_eq!(
            normalize("<IMG alt='a'   src=\"b\" />\n  <p>\n hello   world </p><!-- x --><br></br>"),
            "<img alt=\"a\" src=\"b\"><p>hello world</p><br>"
        );
        assert_eq!(normalize("<div/>"), "<div></div>");
    }

    #[test]
    fn normalize_is_idempotent_on_samples() {
        for s in ["<script> a < b </script>", "a &amp; <b>", "<title>&lt;x&gt;</title>", "x<"] {
            let once = normalize(s);
            assert_eq!(normalize(&once), once, "{s}");
        }
    }

    #[test]
    fn finds_minimal_containing_element() {
        let d = parse_document("<div><p>one</p><p><span>two</span> <b>x</b></p></div>");
        let r = find_segment(&d, &HtmlSnippet::new("<span>two</span>")).unwrap();
        assert_eq!(d.resolve(&r).unwrap().tag(), Some("span"));
        let r = find_segment(&d, &HtmlSnippet::new("<span>two</span><b>x</b>")).unwrap();
        assert_eq!(d.resolve(&r).unwrap().tag(), Some("p"));
        assert!(find_segment(&d, &HtmlSnippet::new("<video controls>")).is_none());
        assert!(find_segment(&d, &HtmlSnippet::new("  ")).is_none());
    }
}
