//! Fragment scoring of correction candidates.

use crate::detect::{accessible_names, detect_static_scoped, Scope};
use crate::dom::{normalize, parse_document, parse_fragment_nodes, Document, Node};
use crate::taxonomy::{Category, Registry};
use crate::violation::DetectedViolation;

/// Optional model-based re-detection of semantic violations in a candidate.
pub trait SemanticRecheck: Send + Sync {
    /// Semantic violations of the same kind as `v` still present in `html`,
    /// or `None` when the check could not run.
    fn recheck(&self, v: &DetectedViolation, html: &str) -> Option<Vec<DetectedViolation>>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub score: u32,
    /// Violations behind the score, for re-prompt feedback.
    pub residual: Vec<DetectedViolation>,
}

pub struct Scorer<'a> {
    pub registry: &'a Registry,
    pub semantic: Option<&'a dyn SemanticRecheck>,
}

impl<'a> Scorer<'a> {
    pub fn new(registry: &'a Registry) -> Self {
        Self { registry, semantic: None }
    }

    pub fn with_semantic(mut self, s: &'a dyn SemanticRecheck) -> Self {
        self.semantic = Some(s);
        self
    }

    /// The fragment as scored: contrast findings are evaluated inside a
    /// wrapper carrying the colors the element inherited on the page.
    pub fn fragment_html(&self, v: &DetectedViolation, html: &str) -> String {
        let Some((fg, bg)) = v.supplementary.as_ref().and_then(|s| s.color_pair()) else {
            return html.to_string();
        };
        let mut nodes = parse_fragment_nodes(html);
        if let Some(first) = nodes.iter_mut().find(|n| n.as_element().is_some()) {
            if !first.has_direct_text() && !crate::dom::is_void(first.tag().unwrap_or_default()) {
                first.children.push(Node::text("Sample text"));
            }
        }
        let inner: String = nodes.iter().map(Node::to_html).collect();
        format!("<div style=\"color:{};background-color:{}\">{inner}</div>", fg.to_hex(), bg.to_hex())
    }

    fn rescan(&self, v: &DetectedViolation, html: &str) -> Vec<DetectedViolation> {
        let doc = parse_document(&self.fragment_html(v, html));
        detect_static_scoped(&doc, &v.context, self.registry, Scope::Fragment)
    }

    /// Whether the fragment rules can see `v` at all; page-level and semantic
    /// types cannot.
    fn own_missing(&self, v: &DetectedViolation) -> bool {
        !self.rescan(v, &v.html()).iter().any(|f| f.type_name == v.type_name)
    }

    fn recheck(&self, v: &DetectedViolation, html: &str) -> Option<Vec<DetectedViolation>> {
        if v.category != Category::Semantic {
            return None;
        }
        self.semantic?.recheck(v, html)
    }

    /// Score of the affected snippets as detected.
    pub fn original(&self, v: &DetectedViolation) -> Scored {
        let mut residual = self.rescan(v, &v.html());
        if self.own_missing(v) {
            // The model already judged the original; a re-check would only
            // add noise to the baseline.
            residual.push(v.clone());
        }
        total(residual)
    }

    /// Score of a candidate replacement for `v`'s snippets.
    pub fn candidate(&self, v: &DetectedViolation, html: &str) -> Scored {
        if normalize(html) == normalize(&v.html()) {
            return self.original(v);
        }
        let mut residual = self.rescan(v, html);
        if let Some(found) = self.recheck(v, html) {
            residual.extend(found);
        } else if self.own_missing(v) && signature(&v.type_name, html) == signature(&v.type_name, &v.html()) {
            residual.push(v.clone());
        }
        total(residual)
    }
}

fn total(residual: Vec<DetectedViolation>) -> Scored {
    Scored { score: residual.iter().map(|r| r.score).sum(), residual }
}

fn attr_values(doc: &Document, tag: Option<&str>, attr: &str) -> Vec<String> {
    doc.elements()
        .into_iter()
        .filter(|(_, n)| tag.is_none_or(|t| n.is_tag(t)))
        .filter_map(|(_, n)| n.attr(attr).map(|v| v.split_whitespace().collect::<Vec<_>>().join(" ")))
        .collect()
}

fn heading_levels(doc: &Document) -> Vec<String> {
    doc.elements()
        .into_iter()
        .filter_map(|(_, n)| {
            let t = n.tag()?;
            (t.len() == 2 && t.starts_with('h') && t.as_bytes()[1].is_ascii_digit()).then(|| t.to_string())
        })
        .collect()
}

/// The feature of a fragment that a repair of `type_name` must change, for
/// types the fragment rules cannot re-detect.
pub(crate) fn signature(type_name: &str, html: &str) -> Vec<String> {
    let doc = parse_document(html);
    match type_name {
        "image-alt-not-descriptive" => attr_values(&doc, Some("img"), "alt"),
        "link-text-mismatch" | "button-label-mismatch" | "ambiguous-heading" | "form-label-mismatch" => {
            accessible_names(&doc)
        }
        "lang-mismatch" => attr_values(&doc, None, "lang"),
        "page-title-not-descriptive" => doc
            .elements()
            .into_iter()
            .filter(|(_, n)| n.is_tag("title"))
            .map(|(_, n)| n.text_content().trim().to_string())
            .collect(),
        "incorrect-semantic-tag" => doc.elements().into_iter().filter_map(|(_, n)| n.tag().map(str::to_string)).collect(),
        "duplicate-id" | "duplicate-id-aria" => attr_values(&doc, None, "id"),
        "page-has-heading-one" => vec![heading_levels(&doc).iter().any(|h| h == "h1").to_string()],
        "landmark-one-main" => vec![doc
            .elements()
            .into_iter()
            .any(|(_, n)| n.is_tag("main") || n.attr("role").is_some_and(|r| r.trim() == "main"))
            .to_string()],
        "heading-order" => heading_levels(&doc).into_iter().take(1).collect(),
        _ => vec![normalize(html)],
    }
}
