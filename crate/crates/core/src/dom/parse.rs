//! Tree construction over the token stream.
//!
//! A reduced set of implied-end rules keeps common sloppy markup (unclosed
//! `<p>`, `<li>`, table cells) shaped the way a browser would, without
//! inserting elements that were not written. Because nothing is synthesized,
//! re-parsing serialized output reproduces the same tree.

use super::tokenizer::{tokenize, Token};
use super::{is_void, Document, Element, Node, NodeKind};

/// Open-element depth cap; deeper start tags become siblings.
const MAX_DEPTH: usize = 512;

const CLOSES_P: &[&str] = &[
    "address", "article", "aside", "blockquote", "details", "dialog", "dd", "div", "dl", "dt",
    "fieldset", "figcaption", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6",
    "header", "hgroup", "hr", "li", "main", "menu", "nav", "ol", "p", "pre", "section", "table",
    "ul",
];

const HEADINGS: &[&str] = &["h1", "h2", "h3", "h4", "h5", "h6"];

/// Whether a start tag `new` implicitly ends a currently open `open`.
fn implies_end(new: &str, open: &str) -> bool {
    match open {
        "p" => CLOSES_P.contains(&new),
        "li" => new == "li",
        "dt" | "dd" => matches!(new, "dt" | "dd"),
        "td" | "th" => matches!(new, "td" | "th" | "tr" | "thead" | "tbody" | "tfoot"),
        "tr" => matches!(new, "tr" | "thead" | "tbody" | "tfoot"),
        "thead" | "tbody" | "tfoot" => matches!(new, "thead" | "tbody" | "tfoot"),
        "option" => matches!(new, "option" | "optgroup"),
        "optgroup" => new == "optgroup",
        h if HEADINGS.contains(&h) => HEADINGS.contains(&new),
        _ => false,
    }
}

struct Builder {
    stack: Vec<Node>,
}

impl Builder {
    fn top(&mut self) -> &mut Node {
        self.stack.last_mut().expect("document node is never popped")
    }

    fn top_tag(&self) -> Option<&str> {
        self.stack.last().and_then(|n| n.tag())
    }

    fn append(&mut self, node: Node) {
        self.top().children.push(node);
    }

    fn append_text(&mut self, text: String) {
        if text.is_empty() {
            return;
        }
        let top = self.top();
        if let Some(Node {
            kind: NodeKind::Text(prev),
            ..
        }) = top.children.last_mut()
        {
            prev.push_str(&text);
        } else {
            top.children.push(Node::text(text));
        }
    }

    fn pop(&mut self) {
        if self.stack.len() > 1 {
            let node = self.stack.pop().expect("len checked");
            self.top().children.push(node);
        }
    }

    fn start(&mut self, name: String, attrs: Vec<(String, String)>, self_closing: bool) {
        while let Some(open) = self.top_tag() {
            if implies_end(&name, open) {
                self.pop();
            } else {
                break;
            }
        }
        let node = Node::element(Element { name, attrs });
        let name = node.tag().unwrap_or_default();
        if is_void(name) || self_closing {
            self.append(node);
            return;
        }
        if self.stack.len() >= MAX_DEPTH {
            self.pop();
        }
        self.stack.push(node);
    }

    fn end(&mut self, name: &str) {
        let Some(idx) = self.stack.iter().rposition(|n| n.is_tag(name)) else {
            return;
        };
        while self.stack.len() > idx {
            self.pop();
        }
    }

    fn finish(mut self) -> Node {
        while self.stack.len() > 1 {
            self.pop();
        }
        self.stack.pop().expect("document node")
    }
}

/// Parses any input into a tree; never fails.
pub fn parse_document(html_text: &str) -> Document {
    let mut b = Builder {
        stack: vec![Node {
            kind: NodeKind::Document,
            children: Vec::new(),
        }],
    };
    for token in tokenize(html_text) {
        match token {
            Token::Doctype(d) => b.append(Node {
                kind: NodeKind::Doctype(d),
                children: Vec::new(),
            }),
            Token::StartTag {
                name,
                attrs,
                self_closing,
            } => b.start(name, attrs, self_closing),
            Token::EndTag(name) => b.end(&name),
            Token::Text(t) => b.append_text(t),
            Token::Comment(c) => b.append(Node {
                kind: NodeKind::Comment(c),
                children: Vec::new(),
            }),
        }
    }
    Document::from_parts(b.finish(), html_text.to_string())
}

/// Parses a fragment and returns its top-level nodes.
pub fn parse_fragment_nodes(html_text: &str) -> Vec<Node> {
    let doc = parse_document(html_text);
    doc.root().children.clone()
}
