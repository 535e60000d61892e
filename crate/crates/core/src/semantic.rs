//! Model-driven detection of semantic violations, grounded against the
//! source document so that invented snippets never reach a report.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detect::snippet_text;
use crate::correct::SemanticRecheck;
use crate::dom::{find_segment, parse_document, Document, HtmlSnippet, Node, NodePath};
use crate::llm::prompts::{load_image_attachment, semantic_detection_bundle};
use crate::llm::{Gateway, LlmError, PromptBundle};
use crate::taxonomy::{Category, Registry, Supplementary};
use crate::violation::{AffectedElement, DetectedViolation, PageContext, SupplementaryInfo};

pub const START_MARKER: &str = "[START]";
pub const END_MARKER: &str = "[END]";

/// Viewport width screenshots are expected to be captured at.
pub const DEFAULT_VIEWPORT_WIDTH: u32 = 1440;

#[derive(Debug, Error)]
pub enum SemanticError {
    #[error("screenshot {path}: {reason}")]
    Screenshot { path: String, reason: String },
    #[error("the taxonomy has no semantic violation types")]
    NoSemanticTypes,
    #[error(transparent)]
    Llm(#[from] LlmError),
}

/// A full-page screenshot supplied by the caller.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreenshotRef {
    pub path: PathBuf,
    pub viewport_width: u32,
    pub note: String,
}

impl ScreenshotRef {
    /// Checks that `path` exists and decodes as an image.
    pub fn new(path: impl Into<PathBuf>) -> Result<Self, SemanticError> {
        let path = path.into();
        let (w, h) = image::image_dimensions(&path).map_err(|e| SemanticError::Screenshot {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Ok(Self {
            note: format!("{w}x{h} pixels, full page"),
            path,
            viewport_width: DEFAULT_VIEWPORT_WIDTH,
        })
    }

    pub fn with_viewport_width(mut self, width: u32) -> Self {
        self.viewport_width = width;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DiscardReason {
    NoMatchInDocument,
    UnknownViolationName,
    MalformedMarkers,
    /// Same element already reported under the same name.
    Duplicate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SemanticFinding {
    pub snippet: HtmlSnippet,
    pub violation_name: String,
    pub grounded: bool,
    pub discard_reason: Option<DiscardReason>,
    /// Element the snippet resolved to, when grounded.
    #[serde(skip)]
    pub path: Option<NodePath>,
}

impl SemanticFinding {
    fn pending(snippet: &str, name: &str) -> Self {
        Self {
            snippet: HtmlSnippet::new(snippet.trim()),
            violation_name: name.to_string(),
            grounded: false,
            discard_reason: None,
            path: None,
        }
    }

    fn discard(mut self, reason: DiscardReason) -> Self {
        self.grounded = false;
        self.discard_reason = Some(reason);
        self
    }
}

/// Semantic taxonomy entries, one line each.
pub fn semantic_taxonomy_listing(registry: &Registry) -> String {
    registry
        .list_types(Some(Category::Semantic))
        .iter()
        .map(|s| format!("- {}: {} ({}; impact {})", s.name, s.description, s.wcag_refs.join(", "), s.impact))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn build_semantic_detection_prompt(
    doc: &Document,
    screenshot: &ScreenshotRef,
    registry: &Registry,
    ctx: &PageContext,
) -> Result<PromptBundle, SemanticError> {
    if registry.list_types(Some(Category::Semantic)).is_empty() {
        return Err(SemanticError::NoSemanticTypes);
    }
    let attachment = load_image_attachment(&screenshot.path).map_err(|e| SemanticError::Screenshot {
        path: screenshot.path.display().to_string(),
        reason: e.to_string(),
    })?;
    let html = if doc.source_text().is_empty() { doc.to_html() } else { doc.source_text().to_string() };
    let note = format!("{}, viewport width {} px, {}", screenshot.path.display(), screenshot.viewport_width, screenshot.note);
    Ok(semantic_detection_bundle(ctx, &html, &semantic_taxonomy_listing(registry), attachment, &note))
}

fn name_token(s: &str) -> Option<&str> {
    let s = s.trim_start_matches(|c: char| c.is_whitespace() || matches!(c, ':' | '-' | '–' | '—' | '*' | '`' | '(' | '"' | '\''));
    let end = s.find(|c: char| !(c.is_ascii_alphanumeric() || c == '-' || c == '_')).unwrap_or(s.len());
    let tok = s[..end].trim_end_matches('-');
    (!tok.is_empty()).then_some(tok)
}

/// Last hyphenated word on the line before a start marker, for answers that
/// put the name first (`1. link-text-mismatch: [START]...`).
fn name_before(line: &str) -> Option<&str> {
    line.split(|c: char| !(c.is_ascii_alphanumeric() || c == '-')).rfind(|w| w.contains('-') && w.chars().any(|c| c.is_ascii_alphabetic()))
}

/// Snippets between `[START]` and `[END]`, each with the violation name
/// written after the end marker on the same line.
pub fn parse_semantic_findings(llm_text: &str) -> Vec<SemanticFinding> {
    let mut out = Vec::new();
    let mut rest = llm_text;
    let mut consumed = 0usize;
    while let Some(s) = rest.find(START_MARKER) {
        let body_from = s + START_MARKER.len();
        let after = &rest[body_from..];
        let end = after.find(END_MARKER);
        let next_start = after.find(START_MARKER);
        match (end, next_start) {
            (Some(e), ns) if ns.is_none_or(|n| n > e) => {
                let snippet = &after[..e];
                let tail = &after[e + END_MARKER.len()..];
                let line_end = tail.find(['\n', '\r']).unwrap_or(tail.len());
                let line_end = tail[..line_end].find(START_MARKER).unwrap_or(line_end);
                let line_start = llm_text[..consumed + s].rfind('\n').map_or(0, |i| i + 1);
                let before = &llm_text[line_start..consumed + s];
                let name = name_token(&tail[..line_end]).or_else(|| name_before(before));
                let f = SemanticFinding::pending(snippet, name.unwrap_or_default());
                out.push(match name {
                    Some(_) if !snippet.trim().is_empty() => f,
                    _ => f.discard(DiscardReason::MalformedMarkers),
                });
                let advance = body_from + e + END_MARKER.len();
                consumed += advance;
                rest = &rest[advance..];
            }
            (_, Some(n)) => {
                out.push(SemanticFinding::pending(&after[..n], "").discard(DiscardReason::MalformedMarkers));
                consumed += body_from + n;
                rest = &rest[body_from + n..];
            }
            _ => {
                out.push(SemanticFinding::pending(after, "").discard(DiscardReason::MalformedMarkers));
                break;
            }
        }
    }
    out
}

/// Keeps findings whose name is a semantic taxonomy entry and whose snippet
/// is found in `doc`.
pub fn ground_findings(
    findings: Vec<SemanticFinding>,
    doc: &Document,
    registry: &Registry,
) -> (Vec<SemanticFinding>, Vec<SemanticFinding>) {
    let mut kept = Vec::new();
    let mut discarded = Vec::new();
    let mut seen: HashSet<(String, NodePath)> = HashSet::new();
    for f in findings {
        if f.discard_reason.is_some() {
            discarded.push(f);
            continue;
        }
        let spec = match registry.lookup(&f.violation_name) {
            Ok(s) if s.category == Category::Semantic => s,
            _ => {
                discarded.push(f.discard(DiscardReason::UnknownViolationName));
                continue;
            }
        };
        let Some(node) = find_segment(doc, &f.snippet) else {
            discarded.push(f.discard(DiscardReason::NoMatchInDocument));
            continue;
        };
        if !seen.insert((spec.name.clone(), node.path().clone())) {
            discarded.push(f.discard(DiscardReason::Duplicate));
            continue;
        }
        let mut f = f;
        f.violation_name = spec.name.clone();
        f.grounded = true;
        f.path = Some(node.path().clone());
        kept.push(f);
    }
    (kept, discarded)
}

/// Options for [`detect_semantic`].
#[derive(Debug, Clone)]
pub struct SemanticOptions {
    /// Fetch image bytes for image supplementary info.
    pub download_images: bool,
    pub download_timeout: Duration,
}

impl Default for SemanticOptions {
    fn default() -> Self {
        Self { download_images: false, download_timeout: Duration::from_secs(10) }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SemanticReport {
    pub violations: Vec<DetectedViolation>,
    pub discarded: Vec<SemanticFinding>,
    pub warnings: Vec<String>,
}

fn first_attr_in(node: &Node, tags: &[&str], attr: &str) -> Option<String> {
    node.descendants()
        .filter(|n| n.tag().is_some_and(|t| tags.contains(&t)))
        .find_map(|n| n.attr(attr).map(|v| v.trim().to_string()).filter(|v| !v.is_empty()))
}

fn resolve_url(base: Option<&str>, src: &str) -> String {
    match base {
        Some(b) if !src.contains("://") && !src.starts_with("data:") => {
            let b = b.trim_end_matches('/');
            if let Some(rel) = src.strip_prefix('/') {
                // Origin of the base URL.
                let origin_end = b.find("://").map(|i| i + 3).and_then(|i| b[i..].find('/').map(|j| i + j)).unwrap_or(b.len());
                format!("{}/{}", &b[..origin_end], rel)
            } else {
                format!("{b}/{src}")
            }
        }
        _ => src.to_string(),
    }
}

fn outline(doc: &Document) -> String {
    doc.elements()
        .into_iter()
        .filter_map(|(_, n)| {
            let t = n.tag()?;
            let level = t.strip_prefix('h')?.parse::<u8>().ok().filter(|l| (1..=6).contains(l))?;
            Some(format!("{}h{level}: {}", "  ".repeat(usize::from(level - 1)), n.text_content().split_whitespace().collect::<Vec<_>>().join(" ")))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn download(url: &str, timeout: Duration) -> Result<Vec<u8>, String> {
    let client = reqwest::blocking::Client::builder()
        .timeout(timeout)
        .build()
        .map_err(|e| e.to_string())?;
    let resp = client.get(url).send().map_err(|e| e.to_string())?;
    if !resp.status().is_success() {
        return Err(format!("HTTP {}", resp.status()));
    }
    resp.bytes().map(|b| b.to_vec()).map_err(|e| e.to_string())
}

fn supplementary_for(
    kind: Supplementary,
    node: &Node,
    doc: &Document,
    screenshot: &ScreenshotRef,
    opts: &SemanticOptions,
    warnings: &mut Vec<String>,
) -> Option<SupplementaryInfo> {
    match kind {
        Supplementary::None | Supplementary::Colors => None,
        Supplementary::Image => {
            let src = first_attr_in(node, &["img"], "src").or_else(|| first_attr_in(node, &["input"], "src"))?;
            let url = resolve_url(doc.base_url.as_deref(), &src);
            let mut info = SupplementaryInfo::new(Supplementary::Image, url.clone());
            if opts.download_images && url.contains("://") {
                match download(&url, opts.download_timeout) {
                    Ok(bytes) => info.data = Some(bytes),
                    Err(e) => warnings.push(format!("image {url} could not be downloaded ({e}); keeping the URL only")),
                }
            }
            Some(info)
        }
        Supplementary::Video => {
            let src = first_attr_in(node, &["video", "source"], "src")?;
            Some(SupplementaryInfo::new(Supplementary::Video, resolve_url(doc.base_url.as_deref(), &src)))
        }
        Supplementary::Screenshot => Some(SupplementaryInfo::new(Supplementary::Screenshot, screenshot.path.display().to_string())),
        Supplementary::DocumentStructure => Some(SupplementaryInfo::new(Supplementary::DocumentStructure, outline(doc))),
    }
}

/// Grounded semantic violations, enriched from the taxonomy.
pub fn detect_semantic(
    doc: &Document,
    screenshot: &ScreenshotRef,
    ctx: &PageContext,
    registry: &Registry,
    llm: &Gateway,
) -> Result<Vec<DetectedViolation>, SemanticError> {
    Ok(detect_semantic_report(doc, screenshot, ctx, registry, llm, &SemanticOptions::default())?.violations)
}

pub fn detect_semantic_report(
    doc: &Document,
    screenshot: &ScreenshotRef,
    ctx: &PageContext,
    registry: &Registry,
    llm: &Gateway,
    opts: &SemanticOptions,
) -> Result<SemanticReport, SemanticError> {
    let bundle = build_semantic_detection_prompt(doc, screenshot, registry, ctx)?;
    let text = llm.complete(&bundle)?;
    let (kept, discarded) = ground_findings(parse_semantic_findings(&text), doc, registry);
    let mut report = SemanticReport { discarded, ..Default::default() };
    for f in kept {
        let path = f.path.clone().expect("grounded findings carry a path");
        let spec = registry.lookup(&f.violation_name).expect("grounded names resolve");
        let node = doc.node_at(&path).expect("grounded path exists");
        let affected = vec![AffectedElement {
            node: doc.node_ref(path.clone()),
            snippet: HtmlSnippet::new(snippet_text(node)),
        }];
        let mut v = DetectedViolation::from_spec(format!("{}:{}", spec.name, path), spec, affected, ctx.clone());
        v.supplementary = supplementary_for(spec.supplementary, node, doc, screenshot, opts, &mut report.warnings);
        v.screenshot = Some(screenshot.path.display().to_string());
        report.violations.push(v);
    }
    report.violations.sort_by(|a, b| {
        let pa = a.affected[0].node.as_ref().map(|n| n.path().clone());
        let pb = b.affected[0].node.as_ref().map(|n| n.path().clone());
        pa.cmp(&pb).then_with(|| a.type_name.cmp(&b.type_name))
    });
    Ok(report)
}

/// Model-based re-detection of a semantic violation in a correction
/// candidate, against the screenshot the violation was detected with.
pub struct GatewayRecheck<'a> {
    pub gateway: &'a Gateway,
    pub registry: &'a Registry,
}

impl SemanticRecheck for GatewayRecheck<'_> {
    fn recheck(&self, v: &DetectedViolation, html: &str) -> Option<Vec<DetectedViolation>> {
        let shot = ScreenshotRef::new(v.screenshot.as_deref()?).ok()?;
        let doc = parse_document(html);
        let bundle = build_semantic_detection_prompt(&doc, &shot, self.registry, &v.context).ok()?;
        let text = self.gateway.complete(&bundle).ok()?;
        let (kept, _) = ground_findings(parse_semantic_findings(&text), &doc, self.registry);
        let spec = self.registry.lookup(&v.type_name).ok()?;
        Some(
            kept.into_iter()
                .filter(|f| f.violation_name == v.type_name)
                .map(|f| {
                    let affected = vec![AffectedElement::detached(f.snippet.text)];
                    DetectedViolation::from_spec(v.id.clone(), spec, affected, v.context.clone())
                })
                .collect(),
        )
    }
}

/// True when `path` names an existing image file.
pub fn screenshot_exists(path: &Path) -> bool {
    image::image_dimensions(path).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_well_formed_pairs() {
        let f = parse_semantic_findings("[START]<img src=\"x.jpg\" alt=\"image\">[END] image-alt-not-descriptive");
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].snippet.text, "<img src=\"x.jpg\" alt=\"image\">");
        assert_eq!(f[0].violation_name, "image-alt-not-descriptive");
        assert_eq!(f[0].discard_reason, None);
    }

    #[test]
    fn degrades_gracefully() {
        assert!(parse_semantic_findings("no markers here").is_empty());
        let f = parse_semantic_findings("[START]abc");
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].discard_reason, Some(DiscardReason::MalformedMarkers));
        let f = parse_semantic_findings("[START]<a>x</a>[END]\n");
        assert_eq!(f[0].discard_reason, Some(DiscardReason::MalformedMarkers));
    }

    #[test]
    fn several_layouts() {
        let text = "1. [START]<a href=\"/\">more</a>[END] — Link-Text-Mismatch\n2. **ambiguous-heading**: [START]<h2>Info</h2>[END]\n[START]<b>[START]<i>x</i>[END] `incorrect-semantic-tag`";
        let f = parse_semantic_findings(text);
        let got: Vec<_> = f.iter().map(|x| (x.snippet.text.as_str(), x.violation_name.as_str(), x.discard_reason)).collect();
        assert_eq!(
            got,
            vec![
                ("<a href=\"/\">more</a>", "Link-Text-Mismatch", None),
                ("<h2>Info</h2>", "ambiguous-heading", None),
                ("<b>", "", Some(DiscardReason::MalformedMarkers)),
                ("<i>x</i>", "incorrect-semantic-tag", None),
            ]
        );
    }

    #[test]
    fn relative_urls() {
        assert_eq!(resolve_url(Some("https://a.com/x/"), "i.png"), "https://a.com/x/i.png");
        assert_eq!(resolve_url(Some("https://a.com/x/y"), "/i.png"), "https://a.com/i.png");
        assert_eq!(resolve_url(None, "i.png"), "i.png");
        assert_eq!(resolve_url(Some("https://a.com"), "https://b.com/i.png"), "https://b.com/i.png");
    }
}
