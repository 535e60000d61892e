//! Accessible-name computation and element classification shared by rules.

use std::collections::HashMap;

use crate::dom::{parse_inline_style, Document, Node, NodeKind, NodePath};

/// One element with facts inherited from its ancestors.
pub(crate) struct El<'a> {
    pub path: NodePath,
    pub node: &'a Node,
    pub hidden: bool,
    /// Inside `head` or another non-rendered container.
    pub unrendered: bool,
}

impl El<'_> {
    pub fn tag(&self) -> &str {
        self.node.tag().unwrap_or_default()
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.node.attr(name)
    }
}

pub(crate) struct Index<'a> {
    pub doc: &'a Document,
    pub els: Vec<El<'a>>,
    ids: HashMap<&'a str, Vec<usize>>,
}

const UNRENDERED: &[&str] = &["head", "script", "style", "template", "noscript", "title"];

impl<'a> Index<'a> {
    pub fn new(doc: &'a Document) -> Self {
        let mut els = Vec::new();
        walk(doc.root(), &NodePath::root(), false, false, &mut els);
        let mut ids: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, el) in els.iter().enumerate() {
            if let Some(id) = el.node.attr("id") {
                let id = id.trim();
                if !id.is_empty() {
                    ids.entry(id).or_default().push(i);
                }
            }
        }
        Self { doc, els, ids }
    }

    pub fn by_id(&self, id: &str) -> Option<&El<'a>> {
        self.ids.get(id).and_then(|v| v.first()).map(|&i| &self.els[i])
    }

    pub fn ids(&self) -> impl Iterator<Item = (&&'a str, &Vec<usize>)> {
        self.ids.iter()
    }

    /// Text of the elements named by an `aria-labelledby` id list.
    pub fn labelledby_text(&self, node: &Node) -> String {
        let Some(list) = node.attr("aria-labelledby") else {
            return String::new();
        };
        list.split_ascii_whitespace()
            .filter_map(|id| self.by_id(id))
            .map(|el| name_from_content(el.node))
            .collect::<Vec<_>>()
            .join(" ")
            .trim()
            .to_string()
    }

    /// Accessible name: labelledby, aria-label, content (with image alt
    /// text), then title.
    pub fn accessible_name(&self, node: &Node) -> String {
        let by = self.labelledby_text(node);
        if !by.is_empty() {
            return by;
        }
        if let Some(label) = node.attr("aria-label").map(str::trim).filter(|s| !s.is_empty()) {
            return label.to_string();
        }
        if node.is_tag("input") {
            let ty = input_type(node);
            let own = match ty.as_str() {
                "button" | "submit" | "reset" => node.attr("value"),
                "image" => node.attr("alt"),
                _ => None,
            };
            if let Some(v) = own.map(str::trim).filter(|s| !s.is_empty()) {
                return v.to_string();
            }
        } else if node.is_tag("img") {
            if let Some(alt) = node.attr("alt").map(str::trim).filter(|s| !s.is_empty()) {
                return alt.to_string();
            }
        } else {
            let content = name_from_content(node);
            if !content.is_empty() {
                return content;
            }
        }
        node.attr("title").map(str::trim).unwrap_or_default().to_string()
    }
}

fn walk<'a>(node: &'a Node, path: &NodePath, hidden: bool, unrendered: bool, out: &mut Vec<El<'a>>) {
    for (i, c) in node.children.iter().enumerate() {
        if let NodeKind::Element(el) = &c.kind {
            let p = path.child(i);
            let h = hidden || is_hidden(c);
            let u = unrendered || UNRENDERED.contains(&el.name.as_str());
            out.push(El {
                path: p.clone(),
                node: c,
                hidden: h,
                unrendered: u,
            });
            walk(c, &p, h, u, out);
        }
    }
}

pub(crate) fn input_type(node: &Node) -> String {
    node.attr("type")
        .map(|t| t.trim().to_ascii_lowercase())
        .unwrap_or_else(|| "text".into())
}

/// Hidden from assistive technology by markup or inline style.
pub(crate) fn is_hidden(node: &Node) -> bool {
    let Some(el) = node.as_element() else {
        return false;
    };
    if el.has_attr("hidden") {
        return true;
    }
    if el.attr("aria-hidden").is_some_and(|v| v.trim().eq_ignore_ascii_case("true")) {
        return true;
    }
    if el.name == "input" && input_type(node) == "hidden" {
        return true;
    }
    el.attr("style").is_some_and(|s| {
        parse_inline_style(s).iter().any(|d| {
            (d.property == "display" && d.value.eq_ignore_ascii_case("none"))
                || (d.property == "visibility" && d.value.eq_ignore_ascii_case("hidden"))
        })
    })
}

/// Visible text of a subtree where images contribute their alt text.
pub(crate) fn name_from_content(node: &Node) -> String {
    let mut out = String::new();
    collect_name(node, &mut out);
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn collect_name(node: &Node, out: &mut String) {
    match &node.kind {
        NodeKind::Text(t) => out.push_str(t),
        NodeKind::Element(el) => {
            if is_hidden(node) || matches!(el.name.as_str(), "script" | "style" | "template") {
                return;
            }
            if el.name == "img" || (el.name == "input" && input_type(node) == "image") {
                if let Some(alt) = el.attr("alt").or_else(|| el.attr("aria-label")) {
                    out.push(' ');
                    out.push_str(alt);
                    out.push(' ');
                }
                return;
            }
            if let Some(label) = el.attr("aria-label").filter(|l| !l.trim().is_empty()) {
                out.push(' ');
                out.push_str(label);
                out.push(' ');
                return;
            }
            for c in &node.children {
                collect_name(c, out);
            }
        }
        _ => {}
    }
}

/// Keyboard-focusable by default or through tabindex.
pub(crate) fn is_focusable(node: &Node) -> bool {
    let Some(el) = node.as_element() else {
        return false;
    };
    if el.has_attr("disabled") || is_hidden(node) {
        return false;
    }
    if let Some(t) = el.attr("tabindex") {
        if let Ok(v) = t.trim().parse::<i64>() {
            return v >= 0;
        }
    }
    if el
        .attr("contenteditable")
        .is_some_and(|v| v.is_empty() || v.eq_ignore_ascii_case("true"))
    {
        return true;
    }
    match el.name.as_str() {
        "a" | "area" => el.has_attr("href"),
        "button" | "select" | "textarea" | "summary" | "iframe" => true,
        "input" => true,
        "audio" | "video" => el.has_attr("controls"),
        _ => false,
    }
}

/// Heading level from the tag or an explicit heading role.
pub(crate) fn heading_level(node: &Node) -> Option<u8> {
    let el = node.as_element()?;
    if el.role().as_deref() == Some("heading") {
        let level = el
            .attr("aria-level")
            .and_then(|l| l.trim().parse::<u8>().ok())
            .filter(|l| (1..=9).contains(l));
        return Some(level.or_else(|| tag_level(&el.name)).unwrap_or(2));
    }
    if el.role().is_some_and(|r| r != "heading" && !r.is_empty()) {
        return None;
    }
    tag_level(&el.name)
}

fn tag_level(name: &str) -> Option<u8> {
    match name.as_bytes() {
        [b'h', d @ b'1'..=b'6'] => Some(d - b'0'),
        _ => None,
    }
}
