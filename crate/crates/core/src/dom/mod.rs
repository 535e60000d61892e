//! HTML document model: lenient parsing, child-index addressing, canonical
//! serialization, snippet matching and inline style resolution.

mod color;
mod entities;
mod parse;
mod serialize;
mod snippet;
mod style;
pub mod tokenizer;

use std::fmt;

pub use color::{resolve_colors, ColorValue};
pub use entities::decode_entities;
pub use parse::{parse_document, parse_fragment_nodes};
pub use snippet::{find_segment, normalize, HtmlSnippet};
pub use style::{parse_inline_style, Declaration};
pub(crate) use serialize::write_start_tag;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomError {
    #[error("node {0} was removed or the document changed since it was addressed")]
    StaleNode(NodePath),
}

/// Elements that never have children or an end tag.
pub const VOID_ELEMENTS: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param",
    "source", "track", "wbr",
];

pub fn is_void(name: &str) -> bool {
    VOID_ELEMENTS.contains(&name)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub name: String,
    /// Attributes in source order; names are lower-cased, first occurrence wins.
    pub attrs: Vec<(String, String)>,
}

impl Element {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            attrs: Vec::new(),
        }
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_str())
    }

    pub fn has_attr(&self, name: &str) -> bool {
        self.attrs.iter().any(|(n, _)| n == name)
    }

    pub fn set_attr(&mut self, name: &str, value: impl Into<String>) {
        let value = value.into();
        match self.attrs.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = value,
            None => self.attrs.push((name.to_string(), value)),
        }
    }

    pub fn remove_attr(&mut self, name: &str) -> Option<String> {
        let idx = self.attrs.iter().position(|(n, _)| n == name)?;
        Some(self.attrs.remove(idx).1)
    }

    /// Lower-cased, trimmed `role` attribute (first token only).
    pub fn role(&self) -> Option<String> {
        self.attr("role")
            .and_then(|r| r.split_ascii_whitespace().next())
            .map(|r| r.to_ascii_lowercase())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Document,
    Doctype(String),
    Element(Element),
    Text(String),
    Comment(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub kind: NodeKind,
    pub children: Vec<Node>,
}

impl Node {
    pub fn element(el: Element) -> Self {
        Self {
            kind: NodeKind::Element(el),
            children: Vec::new(),
        }
    }

    pub fn text(s: impl Into<String>) -> Self {
        Self {
            kind: NodeKind::Text(s.into()),
            children: Vec::new(),
        }
    }

    pub fn as_element(&self) -> Option<&Element> {
        match &self.kind {
            NodeKind::Element(e) => Some(e),
            _ => None,
        }
    }

    pub fn as_element_mut(&mut self) -> Option<&mut Element> {
        match &mut self.kind {
            NodeKind::Element(e) => Some(e),
            _ => None,
        }
    }

    pub fn tag(&self) -> Option<&str> {
        self.as_element().map(|e| e.name.as_str())
    }

    pub fn is_tag(&self, name: &str) -> bool {
        self.tag() == Some(name)
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.as_element().and_then(|e| e.attr(name))
    }

    /// Concatenated descendant text, skipping comments, `script` and `style`.
    pub fn text_content(&self) -> String {
        let mut out = String::new();
        self.collect_text(&mut out);
        out
    }

    fn collect_text(&self, out: &mut String) {
        match &self.kind {
            NodeKind::Text(t) => out.push_str(t),
            NodeKind::Element(e) if e.name == "script" || e.name == "style" => {}
            NodeKind::Comment(_) | NodeKind::Doctype(_) => {}
            _ => {
                for c in &self.children {
                    c.collect_text(out);
                }
            }
        }
    }

    /// True if some direct text child has non-whitespace content.
    pub fn has_direct_text(&self) -> bool {
        self.children.iter().any(|c| match &c.kind {
            NodeKind::Text(t) => t.chars().any(|ch| !ch.is_whitespace()),
            _ => false,
        })
    }

    /// Pre-order iterator over this node and all descendants.
    pub fn descendants(&self) -> impl Iterator<Item = &Node> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children.iter().rev());
            Some(node)
        })
    }

    pub fn to_html(&self) -> String {
        serialize::serialize(self)
    }

    /// Canonical snippet form of this subtree, see [`normalize`].
    pub fn normalized(&self) -> String {
        snippet::normalize_node(self)
    }
}

/// Ordered child-index path from the document root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NodePath(pub Vec<usize>);

impl NodePath {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    pub fn child(&self, idx: usize) -> Self {
        let mut v = self.0.clone();
        v.push(idx);
        Self(v)
    }

    pub fn parent(&self) -> Option<Self> {
        if self.0.is_empty() {
            None
        } else {
            Some(Self(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn is_ancestor_of(&self, other: &NodePath) -> bool {
        other.0.len() > self.0.len() && other.0.starts_with(&self.0)
    }

    pub fn parse(s: &str) -> Option<Self> {
        if s.is_empty() {
            return Some(Self::root());
        }
        s.split('.')
            .map(|p| p.parse().ok())
            .collect::<Option<Vec<usize>>>()
            .map(Self)
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        f.write_str(&parts.join("."))
    }
}

/// Handle to a node of a specific document revision.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NodeRef {
    path: NodePath,
    revision: u64,
}

impl NodeRef {
    pub fn path(&self) -> &NodePath {
        &self.path
    }
}

#[derive(Debug, Clone)]
pub struct Document {
    root: Node,
    source_text: String,
    pub base_url: Option<String>,
    revision: u64,
}

impl Document {
    pub(crate) fn from_parts(root: Node, source_text: String) -> Self {
        Self {
            root,
            source_text,
            base_url: None,
            revision: 0,
        }
    }

    pub fn with_base_url(mut self, url: impl Into<String>) -> Self {
        self.base_url = Some(url.into());
        self
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn source_text(&self) -> &str {
        &self.source_text
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn node_ref(&self, path: NodePath) -> Option<NodeRef> {
        self.node_at(&path)?;
        Some(NodeRef {
            path,
            revision: self.revision,
        })
    }

    pub fn node_at(&self, path: &NodePath) -> Option<&Node> {
        let mut node = &self.root;
        for &i in &path.0 {
            node = node.children.get(i)?;
        }
        Some(node)
    }

    pub fn resolve(&self, node: &NodeRef) -> Result<&Node, DomError> {
        if node.revision != self.revision {
            return Err(DomError::StaleNode(node.path.clone()));
        }
        self.node_at(&node.path)
            .ok_or_else(|| DomError::StaleNode(node.path.clone()))
    }

    /// Nodes from the root down to (and including) the node at `path`.
    pub fn ancestry(&self, path: &NodePath) -> Vec<&Node> {
        let mut out = vec![&self.root];
        let mut node = &self.root;
        for &i in &path.0 {
            match node.children.get(i) {
                Some(c) => {
                    out.push(c);
                    node = c;
                }
                None => break,
            }
        }
        out
    }

    /// All element nodes in document order with their paths.
    pub fn elements(&self) -> Vec<(NodePath, &Node)> {
        let mut out = Vec::new();
        fn walk<'a>(node: &'a Node, path: &NodePath, out: &mut Vec<(NodePath, &'a Node)>) {
            for (i, c) in node.children.iter().enumerate() {
                if c.as_element().is_some() {
                    let p = path.child(i);
                    out.push((p.clone(), c));
                    walk(c, &p, out);
                }
            }
        }
        walk(&self.root, &NodePath::root(), &mut out);
        out
    }

    pub fn element_count(&self) -> usize {
        self.root
            .descendants()
            .filter(|n| n.as_element().is_some())
            .count()
    }

    pub fn to_html(&self) -> String {
        self.root.to_html()
    }

    /// Replaces the node at `path` with `replacement` nodes. Bumps the
    /// revision, invalidating outstanding [`NodeRef`]s.
    pub fn replace_node(&mut self, path: &NodePath, replacement: Vec<Node>) -> Result<(), DomError> {
        let (last, parent_path) = match path.0.split_last() {
            Some((last, rest)) => (*last, NodePath(rest.to_vec())),
            None => return Err(DomError::StaleNode(path.clone())),
        };
        let parent = self
            .node_at_mut(&parent_path)
            .ok_or_else(|| DomError::StaleNode(path.clone()))?;
        if last >= parent.children.len() {
            return Err(DomError::StaleNode(path.clone()));
        }
        parent.children.splice(last..=last, replacement);
        self.revision += 1;
        Ok(())
    }

    /// Mutable access to a node; bumps the revision.
    pub fn node_at_mut(&mut self, path: &NodePath) -> Option<&mut Node> {
        let mut node = &mut self.root;
        for &i in &path.0 {
            node = node.children.get_mut(i)?;
        }
        self.revision += 1;
        Some(node)
    }
}

/// Serializes the addressed subtree with attributes in canonical order.
pub fn serialize_node(doc: &Document, node: &NodeRef) -> Result<String, DomError> {
    Ok(doc.resolve(node)?.to_html())
}
