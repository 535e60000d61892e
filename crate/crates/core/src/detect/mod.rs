//! Static rule engine for syntactic and layout violations.

mod aria;
mod rules;

use rayon::prelude::*;
use thiserror::Error;

use crate::dom::{parse_document, ColorValue, Document, HtmlSnippet, Node, NodePath, NodeRef};
use crate::taxonomy::Registry;
use crate::violation::{AffectedElement, DetectedViolation, PageContext};

pub use rules::Scope;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DetectError {
    #[error("unknown rule {0:?}")]
    UnknownRule(String),
}

/// A raw rule finding before taxonomy enrichment.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleFinding {
    pub nodes: Vec<NodeRef>,
    pub detail: String,
}

/// Identifiers of every rule in the catalog, sorted.
pub fn rule_ids() -> Vec<&'static str> {
    rules::RULES.iter().map(|r| r.id).collect()
}

/// Runs one rule on a whole document.
pub fn run_rule(rule_id: &str, doc: &Document) -> Result<Vec<RuleFinding>, DetectError> {
    let rule = rules::rule(rule_id).ok_or_else(|| DetectError::UnknownRule(rule_id.to_string()))?;
    let ix = aria::Index::new(doc);
    Ok((rule.run)(&ix, Scope::Document)
        .into_iter()
        .map(|h| RuleFinding {
            nodes: h.paths.into_iter().filter_map(|p| doc.node_ref(p)).collect(),
            detail: h.detail,
        })
        .collect())
}

/// Whole-document detection.
pub fn detect_static(doc: &Document, ctx: &PageContext, registry: &Registry) -> Vec<DetectedViolation> {
    detect_static_scoped(doc, ctx, registry, Scope::Document)
}

/// Detection with page-level rules enabled only for [`Scope::Document`].
/// Rules without a taxonomy entry in `registry` are skipped.
pub fn detect_static_scoped(
    doc: &Document,
    ctx: &PageContext,
    registry: &Registry,
    scope: Scope,
) -> Vec<DetectedViolation> {
    let ix = aria::Index::new(doc);
    let mut found: Vec<(NodePath, DetectedViolation)> = rules::RULES
        .par_iter()
        .filter_map(|rule| registry.lookup(rule.id).ok().map(|spec| (rule, spec)))
        .flat_map_iter(|(rule, spec)| {
            (rule.run)(&ix, scope).into_iter().filter_map(|hit| {
                let first = hit.paths.first()?.clone();
                let affected: Vec<AffectedElement> = hit
                    .paths
                    .iter()
                    .filter_map(|p| {
                        let node = doc.node_at(p)?;
                        Some(AffectedElement {
                            node: doc.node_ref(p.clone()),
                            snippet: HtmlSnippet::new(snippet_text(node)),
                        })
                    })
                    .collect();
                let mut v = DetectedViolation::from_spec(format!("{}:{}", rule.id, first), spec, affected, ctx.clone());
                v.approximate = rule.approximate;
                v.fix_advice = Some(format!("{} {}", hit.detail, hit.advice).trim().to_string());
                v.supplementary = hit.supplementary;
                Some((first, v))
            })
        })
        .collect();
    found.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.type_name.cmp(&b.1.type_name)));
    found.into_iter().map(|(_, v)| v).collect()
}

/// `tag=name` for every element, in document order.
pub(crate) fn accessible_names(doc: &Document) -> Vec<String> {
    let ix = aria::Index::new(doc);
    ix.els
        .iter()
        .map(|e| format!("{}={}", e.tag(), ix.accessible_name(e.node)))
        .collect()
}

/// Serialized form used for affected elements. The document element and
/// body are reported as their start tag alone.
pub(crate) fn snippet_text(node: &Node) -> String {
    match node.as_element() {
        Some(el) if el.name == "html" || el.name == "body" => {
            let mut out = String::new();
            crate::dom::write_start_tag(el, &mut out);
            out
        }
        _ => node.to_html(),
    }
}

fn relative_luminance(c: ColorValue) -> f64 {
    let lin = |v: u8| {
        let s = f64::from(v) / 255.0;
        if s <= 0.03928 {
            s / 12.92
        } else {
            ((s + 0.055) / 1.055).powf(2.4)
        }
    };
    0.2126 * lin(c.r) + 0.7152 * lin(c.g) + 0.0722 * lin(c.b)
}

/// WCAG 2 contrast ratio of two opaque colors, in `[1, 21]`.
pub fn contrast_ratio(fg: ColorValue, bg: ColorValue) -> f64 {
    let (a, b) = (relative_luminance(fg), relative_luminance(bg));
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    (hi + 0.05) / (lo + 0.05)
}

/// Detects violations in an HTML fragment that is not a full page.
pub trait FragmentDetector: Send + Sync {
    fn detect(&self, html: &str, ctx: &PageContext) -> Vec<DetectedViolation>;
}

/// Static rules in fragment scope.
pub struct StaticDetector<'r> {
    pub registry: &'r Registry,
}

impl FragmentDetector for StaticDetector<'_> {
    fn detect(&self, html: &str, ctx: &PageContext) -> Vec<DetectedViolation> {
        detect_static_scoped(&parse_document(html), ctx, self.registry, Scope::Fragment)
    }
}

/// Sum of violation scores from all `detectors` on `html`; 0 means compliant.
pub fn violation_score(html: &str, detectors: &[&dyn FragmentDetector], ctx: &PageContext) -> u32 {
    detectors
        .iter()
        .flat_map(|d| d.detect(html, ctx))
        .map(|v| v.score)
        .sum()
}

/// Static-only fragment score.
pub fn static_score(html: &str, registry: &Registry, ctx: &PageContext) -> u32 {
    violation_score(html, &[&StaticDetector { registry }], ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(html: &str) -> Document {
        parse_document(html)
    }

    fn types(html: &str) -> Vec<String> {
        let r = Registry::bundled();
        detect_static(&doc(html), &PageContext::default(), &r)
            .into_iter()
            .map(|v| v.type_name)
            .collect()
    }

    #[test]
    fn minimal_compliant_page_is_clean() {
        assert!(types(r#"<html lang="en"><head><title>t</title></head><body><p>x</p></body></html>"#).is_empty());
        assert!(types("").is_empty());
    }

    #[test]
    fn unknown_rule_is_an_error() {
        assert_eq!(run_rule("nope", &doc("<p>")), Err(DetectError::UnknownRule("nope".into())));
    }

    #[test]
    fn meta_refresh_and_duplicates() {
        let d = doc(r#"<meta http-equiv="refresh" content="5"><meta http-equiv="refresh" content="0; url=/x">"#);
        assert_eq!(run_rule("meta-refresh", &d).unwrap().len(), 1);
        let d = doc(r#"<p id="x">a</p><p id="x">b</p><span id="y"></span>"#);
        let hits = run_rule("duplicate-id", &d).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].nodes.len(), 2);
        assert!(run_rule("duplicate-id-aria", &d).unwrap().is_empty());
        let d = doc(r#"<p id="x">a</p><p id="x">b</p><button aria-labelledby="x"></button>"#);
        assert!(run_rule("duplicate-id", &d).unwrap().is_empty());
        assert_eq!(run_rule("duplicate-id-aria", &d).unwrap().len(), 1);
    }

    #[test]
    fn names_and_alt() {
        assert_eq!(types(r#"<button><img src="a.png"></button>"#), vec!["button-name"]);
        assert!(types(r#"<button><img src="a.png" alt="Go"></button>"#).is_empty());
        assert!(types(r#"<button aria-label="Go"></button>"#).is_empty());
        assert_eq!(types(r#"<a href="/x"></a>"#), vec!["link-name"]);
        assert!(types(r#"<a name="anchor"></a>"#).is_empty());
        assert_eq!(types(r#"<img src="a.png">"#), vec!["image-alt"]);
        assert!(types(r#"<img src="a.png" role="presentation">"#).is_empty());
        assert!(types(r#"<span id="l">Logo</span><img src="a.png" aria-labelledby="l">"#).is_empty());
    }

    #[test]
    fn lang_rules() {
        assert_eq!(types("<html><body></body></html>"), vec!["html-has-lang"]);
        assert_eq!(types(r#"<html lang="english"></html>"#), vec!["valid-lang"]);
        assert!(types(r#"<html lang="pt-BR"></html>"#).is_empty());
        assert_eq!(types(r#"<html lang="en" xml:lang="fr"></html>"#), vec!["html-xml-lang-mismatch"]);
        assert!(types(r#"<html lang="en-US" xml:lang="en"></html>"#).is_empty());
    }

    #[test]
    fn structural_rules() {
        assert_eq!(types(r#"<h1>a</h1><h3>b</h3>"#), vec!["heading-order"]);
        assert_eq!(types(r#"<h1></h1>"#), vec!["empty-heading"]);
        assert_eq!(types(r#"<div tabindex="3">x</div>"#), vec!["tabindex"]);
        assert_eq!(types(r#"<div role="checkbox">x</div>"#), vec!["aria-required-attr"]);
        assert!(types(r#"<input type="checkbox" role="switch">"#).is_empty());
        assert_eq!(types(r#"<button><a href="/">x</a></button>"#), vec!["nested-interactive"]);
        assert_eq!(
            types(r#"<table><tr><td>a</td></tr><tr><td>b</td></tr></table>"#),
            vec!["empty-table-header"]
        );
        assert_eq!(types(r#"<table><tr><th></th></tr></table>"#), vec!["empty-table-header"]);
        assert_eq!(
            types(r#"<p style="line-height: 2 !important">x</p>"#),
            vec!["avoid-inline-spacing"]
        );
    }

    #[test]
    fn page_level_rules_need_document_scope() {
        let html = r#"<html lang="en"><body><nav>n</nav><h2>x</h2></body></html>"#;
        let mut t = types(html);
        t.sort();
        assert_eq!(t, vec!["landmark-one-main", "page-has-heading-one"]);
        let r = Registry::bundled();
        assert!(detect_static_scoped(&doc(html), &PageContext::default(), &r, Scope::Fragment).is_empty());
    }

    #[test]
    fn viewport_variants() {
        assert_eq!(types(r#"<meta name="viewport" content="width=device-width, user-scalable=no">"#), vec!["meta-viewport"]);
        assert_eq!(types(r#"<meta name="viewport" content="maximum-scale=1.5">"#), vec!["meta-viewport"]);
        assert!(types(r#"<meta name="viewport" content="width=device-width, initial-scale=1">"#).is_empty());
    }

    #[test]
    fn contrast_thresholds() {
        assert_eq!(types(r#"<p style="color:#767676;background:#303030">x</p>"#), vec!["color-contrast"]);
        // 2.9:1 fails even for large text; 3.56:1 passes only for large text.
        assert_eq!(types(r#"<p style="color:#767676;background:#303030;font-size:30px">x</p>"#), vec!["color-contrast"]);
        assert!(types(r#"<p style="color:#888;background:#333;font-size:24px">x</p>"#).is_empty());
        assert!(types(r#"<p style="color:#888;background:#333;font-size:14pt;font-weight:bold">x</p>"#).is_empty());
        assert_eq!(types(r#"<p style="color:#888;background:#333;font-size:14pt">x</p>"#), vec!["color-contrast"]);
        assert!(types(r#"<p style="color:#888;background:#333" hidden>x</p>"#).is_empty());
    }

    #[test]
    fn scrollable_regions() {
        assert_eq!(
            types(r#"<div style="overflow:auto"><p>x</p></div>"#),
            vec!["scrollable-region-focusable"]
        );
        assert!(types(r#"<div style="overflow:auto" tabindex="0"><p>x</p></div>"#).is_empty());
        assert!(types(r#"<div class="scroll-box"><a href="/">x</a></div>"#).is_empty());
    }

    #[test]
    fn contrast_extremes() {
        assert_eq!(contrast_ratio(ColorValue::WHITE, ColorValue::BLACK), 21.0);
        let c = ColorValue::rgb(12, 200, 99);
        assert_eq!(contrast_ratio(c, c), 1.0);
    }

    #[test]
    fn shallow_root_snippets() {
        let r = Registry::bundled();
        let v = detect_static(&doc("<html><body><p>x</p></body></html>"), &PageContext::default(), &r);
        assert_eq!(v[0].html(), "<html>");
        assert_eq!(v[0].id, "html-has-lang:0");
    }
}
