use super::entities::{escape_attr, escape_text};
use super::tokenizer::raw_text_kind;
use super::{is_void, Element, Node, NodeKind};

pub(crate) fn serialize(node: &Node) -> String {
    let mut out = String::new();
    write_node(node, false, &mut out);
    out
}

/// Start tag with attributes sorted by name.
pub(crate) fn write_start_tag(el: &Element, out: &mut String) {
    out.push('<');
    out.push_str(&el.name);
    let mut attrs: Vec<&(String, String)> = el.attrs.iter().collect();
    attrs.sort_by(|a, b| a.0.cmp(&b.0));
    for (i, (name, value)) in attrs.iter().enumerate() {
        out.push(' ');
        out.push_str(name);
        // A bare name followed by an attribute named `=...` would absorb it as a value.
        let next_eq = attrs.get(i + 1).is_some_and(|(n, _)| n.starts_with('='));
        if !value.is_empty() || next_eq {
            out.push_str("=\"");
            escape_attr(value, out);
            out.push('"');
        }
    }
    out.push('>');
}

fn write_node(node: &Node, raw_parent: bool, out: &mut String) {
    match &node.kind {
        NodeKind::Document => {
            for c in &node.children {
                write_node(c, false, out);
            }
        }
        NodeKind::Doctype(d) if d.is_empty() => out.push_str("<!DOCTYPE>"),
        NodeKind::Doctype(d) => {
            out.push_str("<!DOCTYPE ");
            out.push_str(d);
            out.push('>');
        }
        NodeKind::Element(el) => {
            write_start_tag(el, out);
            if is_void(&el.name) {
                return;
            }
            let raw = raw_text_kind(&el.name) == Some(false);
            for c in &node.children {
                write_node(c, raw, out);
            }
            out.push_str("</");
            out.push_str(&el.name);
            out.push('>');
        }
        NodeKind::Text(t) if raw_parent => out.push_str(t),
        NodeKind::Text(t) => escape_text(t, out),
        NodeKind::Comment(c) => {
            out.push_str("<!--");
            out.push_str(c);
            out.push_str("-->");
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::dom::parse_document;

    #[test]
    fn attributes_are_sorted_and_escaped() {
        let d = parse_document(r#"<a title='say "hi"' href="x?a=1&amp;b=2" hidden>t &lt; u</a>"#);
        assert_eq!(
            d.to_html(),
            r#"<a hidden href="x?a=1&amp;b=2" title="say &quot;hi&quot;">t &lt; u</a>"#
        );
    }

    #[test]
    fn raw_text_is_not_escaped() {
        let d = parse_document("<style>a > b {}</style><title>a &amp; b</title>");
        assert_eq!(d.to_html(), "<style>a > b {}</style><title>a &amp; b</title>");
    }
}
