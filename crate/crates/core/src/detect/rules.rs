//! The static rule catalog.

use std::sync::OnceLock;

use regex::Regex;

use super::aria::{heading_level, input_type, is_focusable, Index};
use super::contrast_ratio;
use crate::dom::{parse_inline_style, resolve_colors, Declaration, Node, NodePath};
use crate::violation::SupplementaryInfo;

/// Evaluation scope. Page-level rules only make sense on whole documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Document,
    Fragment,
}

#[derive(Debug, Clone)]
pub(crate) struct Hit {
    pub paths: Vec<NodePath>,
    pub detail: String,
    pub advice: &'static str,
    pub supplementary: Option<SupplementaryInfo>,
}

impl Hit {
    fn one(path: &NodePath, detail: impl Into<String>, advice: &'static str) -> Self {
        Self {
            paths: vec![path.clone()],
            detail: detail.into(),
            advice,
            supplementary: None,
        }
    }
}

type RuleFn = fn(&Index, Scope) -> Vec<Hit>;

pub(crate) struct Rule {
    pub id: &'static str,
    pub run: RuleFn,
    pub approximate: bool,
}

pub(crate) const RULES: &[Rule] = &[
    Rule { id: "aria-required-attr", run: aria_required_attr, approximate: false },
    Rule { id: "avoid-inline-spacing", run: avoid_inline_spacing, approximate: false },
    Rule { id: "button-name", run: button_name, approximate: false },
    Rule { id: "color-contrast", run: color_contrast, approximate: true },
    Rule { id: "duplicate-id", run: duplicate_id, approximate: false },
    Rule { id: "duplicate-id-aria", run: duplicate_id_aria, approximate: false },
    Rule { id: "empty-heading", run: empty_heading, approximate: false },
    Rule { id: "empty-table-header", run: empty_table_header, approximate: false },
    Rule { id: "heading-order", run: heading_order, approximate: false },
    Rule { id: "html-has-lang", run: html_has_lang, approximate: false },
    Rule { id: "html-xml-lang-mismatch", run: html_xml_lang_mismatch, approximate: false },
    Rule { id: "image-alt", run: image_alt, approximate: false },
    Rule { id: "landmark-one-main", run: landmark_one_main, approximate: false },
    Rule { id: "link-name", run: link_name, approximate: false },
    Rule { id: "meta-refresh", run: meta_refresh, approximate: false },
    Rule { id: "meta-viewport", run: meta_viewport, approximate: false },
    Rule { id: "nested-interactive", run: nested_interactive, approximate: false },
    Rule { id: "page-has-heading-one", run: page_has_heading_one, approximate: false },
    Rule { id: "scrollable-region-focusable", run: scrollable_region_focusable, approximate: true },
    Rule { id: "tabindex", run: tabindex, approximate: false },
    Rule { id: "valid-lang", run: valid_lang, approximate: false },
];

pub(crate) fn rule(id: &str) -> Option<&'static Rule> {
    RULES.iter().find(|r| r.id == id)
}

fn nonempty(v: Option<&str>) -> Option<&str> {
    v.map(str::trim).filter(|s| !s.is_empty())
}

fn inline_style(node: &Node) -> Vec<Declaration> {
    node.attr("style").map(parse_inline_style).unwrap_or_default()
}

fn html_has_lang(ix: &Index, _: Scope) -> Vec<Hit> {
    ix.els
        .iter()
        .filter(|e| e.tag() == "html")
        .filter(|e| nonempty(e.attr("lang")).is_none() && nonempty(e.attr("xml:lang")).is_none())
        .map(|e| Hit::one(&e.path, "html element has no lang attribute", "Add a lang attribute naming the page language, e.g. lang=\"en\"."))
        .collect()
}

fn lang_shape() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^[A-Za-z]{2,3}(-[A-Za-z]{4})?(-([A-Za-z]{2}|[0-9]{3}))?$").expect("valid regex")
    })
}

fn valid_lang(ix: &Index, _: Scope) -> Vec<Hit> {
    let mut out = Vec::new();
    for e in &ix.els {
        for attr in ["lang", "xml:lang"] {
            if let Some(v) = nonempty(e.attr(attr)) {
                if !lang_shape().is_match(v) {
                    out.push(Hit::one(&e.path, format!("{attr}=\"{v}\" is not a valid language tag"), "Use a BCP 47 language tag such as en, en-GB or pt-BR."));
                    break;
                }
            }
        }
    }
    out
}

fn primary_subtag(v: &str) -> String {
    v.split('-').next().unwrap_or_default().to_ascii_lowercase()
}

fn html_xml_lang_mismatch(ix: &Index, _: Scope) -> Vec<Hit> {
    ix.els
        .iter()
        .filter(|e| e.tag() == "html")
        .filter_map(|e| {
            let lang = nonempty(e.attr("lang"))?;
            let xml = nonempty(e.attr("xml:lang"))?;
            (primary_subtag(lang) != primary_subtag(xml)).then(|| {
                Hit::one(&e.path, format!("lang=\"{lang}\" and xml:lang=\"{xml}\" disagree"), "Make lang and xml:lang name the same base language.")
            })
        })
        .collect()
}

fn inside(ix: &Index, path: &NodePath, tags: &[&str]) -> bool {
    ix.doc
        .ancestry(path)
        .iter()
        .rev()
        .skip(1)
        .any(|n| n.tag().is_some_and(|t| tags.contains(&t)))
}

fn image_alt(ix: &Index, _: Scope) -> Vec<Hit> {
    ix.els
        .iter()
        .filter(|e| e.tag() == "img" && !e.hidden)
        .filter(|e| !matches!(e.node.as_element().and_then(|el| el.role()).as_deref(), Some("presentation" | "none")))
        // Images inside links and buttons are covered by the name rules.
        .filter(|e| !inside(ix, &e.path, &["a", "button"]))
        .filter(|e| {
            nonempty(e.attr("alt")).is_none()
                && nonempty(e.attr("aria-label")).is_none()
                && ix.labelledby_text(e.node).is_empty()
                && nonempty(e.attr("title")).is_none()
        })
        .map(|e| Hit::one(&e.path, "image has no alternative text", "Add an alt attribute describing the image, or role=\"presentation\" if it is decorative."))
        .collect()
}

fn is_button(node: &Node) -> bool {
    let Some(el) = node.as_element() else { return false };
    match el.role().as_deref() {
        Some("button") => true,
        Some(r) if !r.is_empty() => false,
        _ => el.name == "button" || (el.name == "input" && input_type(node) == "button"),
    }
}

fn button_name(ix: &Index, _: Scope) -> Vec<Hit> {
    ix.els
        .iter()
        .filter(|e| !e.hidden && is_button(e.node))
        .filter(|e| ix.accessible_name(e.node).is_empty())
        .map(|e| Hit::one(&e.path, "button has no discernible text", "Give the button visible text, an aria-label, or alt text on its image."))
        .collect()
}

fn is_link(node: &Node) -> bool {
    let Some(el) = node.as_element() else { return false };
    match el.role().as_deref() {
        Some("link") => true,
        Some(r) if !r.is_empty() => false,
        _ => el.name == "a" && el.has_attr("href"),
    }
}

fn link_name(ix: &Index, _: Scope) -> Vec<Hit> {
    ix.els
        .iter()
        .filter(|e| !e.hidden && is_link(e.node))
        .filter(|e| ix.accessible_name(e.node).is_empty())
        .map(|e| Hit::one(&e.path, "link has no discernible text", "Give the link text content, an aria-label, or alt text on its image."))
        .collect()
}

fn aria_refs(ix: &Index) -> std::collections::HashSet<String> {
    let mut refs = std::collections::HashSet::new();
    for e in &ix.els {
        for attr in ["aria-labelledby", "aria-describedby", "aria-controls", "aria-owns"] {
            if let Some(v) = e.attr(attr) {
                refs.extend(v.split_ascii_whitespace().map(str::to_string));
            }
        }
        if e.tag() == "label" {
            if let Some(f) = nonempty(e.attr("for")) {
                refs.insert(f.to_string());
            }
        }
    }
    refs
}

fn duplicate_groups(ix: &Index, referenced: bool) -> Vec<Hit> {
    let refs = aria_refs(ix);
    let mut groups: Vec<(&str, Vec<NodePath>)> = ix
        .ids()
        .filter(|(_, members)| members.len() > 1)
        .filter(|(id, _)| refs.contains(**id) == referenced)
        .map(|(id, members)| (*id, members.iter().map(|&i| ix.els[i].path.clone()).collect()))
        .collect();
    groups.sort_by(|a, b| a.1.cmp(&b.1));
    groups
        .into_iter()
        .map(|(id, paths)| Hit {
            detail: format!("id \"{id}\" is used by {} elements", paths.len()),
            paths,
            advice: "Give each element a unique id and update any references to it.",
            supplementary: None,
        })
        .collect()
}

fn duplicate_id(ix: &Index, _: Scope) -> Vec<Hit> {
    duplicate_groups(ix, false)
}

fn duplicate_id_aria(ix: &Index, _: Scope) -> Vec<Hit> {
    duplicate_groups(ix, true)
}

fn tabindex(ix: &Index, _: Scope) -> Vec<Hit> {
    ix.els
        .iter()
        .filter_map(|e| {
            let v: i64 = e.attr("tabindex")?.trim().parse().ok()?;
            (v > 0).then(|| Hit::one(&e.path, format!("tabindex=\"{v}\" overrides the natural tab order"), "Use tabindex=\"0\" or -1 and order the markup instead."))
        })
        .collect()
}

fn meta_content(node: &Node) -> Vec<(String, String)> {
    node.attr("content")
        .unwrap_or_default()
        .split([',', ';'])
        .filter_map(|part| {
            let (k, v) = part.split_once('=')?;
            Some((k.trim().to_ascii_lowercase(), v.trim().to_ascii_lowercase()))
        })
        .collect()
}

fn meta_viewport(ix: &Index, _: Scope) -> Vec<Hit> {
    ix.els
        .iter()
        .filter(|e| e.tag() == "meta" && e.attr("name").is_some_and(|n| n.trim().eq_ignore_ascii_case("viewport")))
        .filter_map(|e| {
            let mut problems = Vec::new();
            for (k, v) in meta_content(e.node) {
                match k.as_str() {
                    "user-scalable" if matches!(v.as_str(), "no" | "0") => problems.push(format!("user-scalable={v}")),
                    "maximum-scale" => {
                        if let Ok(s) = v.parse::<f64>() {
                            if s < 2.0 {
                                problems.push(format!("maximum-scale={v}"));
                            }
                        }
                    }
                    _ => {}
                }
            }
            (!problems.is_empty()).then(|| {
                Hit::one(&e.path, format!("viewport disables zoom: {}", problems.join(", ")), "Remove user-scalable=no and any maximum-scale below 2.")
            })
        })
        .collect()
}

fn meta_refresh(ix: &Index, _: Scope) -> Vec<Hit> {
    ix.els
        .iter()
        .filter(|e| e.tag() == "meta" && e.attr("http-equiv").is_some_and(|n| n.trim().eq_ignore_ascii_case("refresh")))
        .filter_map(|e| {
            let content = e.attr("content").unwrap_or_default();
            let delay = content.split([';', ',']).next().unwrap_or_default().trim();
            let delay: f64 = delay.parse().ok()?;
            (delay > 0.0).then(|| Hit::one(&e.path, format!("page refreshes after {delay} seconds"), "Remove the timed refresh or let users control it."))
        })
        .collect()
}

fn empty_heading(ix: &Index, _: Scope) -> Vec<Hit> {
    ix.els
        .iter()
        .filter(|e| !e.hidden && heading_level(e.node).is_some())
        .filter(|e| ix.accessible_name(e.node).is_empty())
        .map(|e| Hit::one(&e.path, "heading has no discernible text", "Put text in the heading or remove it."))
        .collect()
}

fn is_header_cell(node: &Node) -> bool {
    let Some(el) = node.as_element() else { return false };
    match el.role().as_deref() {
        Some("columnheader" | "rowheader") => true,
        Some(r) if !r.is_empty() => false,
        _ => el.name == "th",
    }
}

/// Rows and cells belonging to `table` itself, not to nested tables.
fn table_parts(table: &Node, rows: &mut usize, headers: &mut usize) {
    for c in &table.children {
        match c.tag() {
            Some("table") | None => {}
            Some(t) => {
                if t == "tr" {
                    *rows += 1;
                }
                if is_header_cell(c) {
                    *headers += 1;
                }
                table_parts(c, rows, headers);
            }
        }
    }
}

fn empty_table_header(ix: &Index, _: Scope) -> Vec<Hit> {
    let mut out = Vec::new();
    for e in ix.els.iter().filter(|e| !e.hidden) {
        if is_header_cell(e.node) && ix.accessible_name(e.node).is_empty() {
            out.push(Hit::one(&e.path, "table header cell has no discernible text", "Put text in the header cell."));
        } else if e.tag() == "table" && e.node.as_element().and_then(|el| el.role()).is_none() {
            let (mut rows, mut headers) = (0, 0);
            table_parts(e.node, &mut rows, &mut headers);
            if rows >= 2 && headers == 0 {
                out.push(Hit::one(&e.path, format!("data table with {rows} rows has no header cells"), "Mark the header row with th elements (scope=\"col\") inside thead."));
            }
        }
    }
    out
}

fn html_elements<'i, 'a>(ix: &'i Index<'a>) -> impl Iterator<Item = &'i super::aria::El<'a>> {
    ix.els.iter().filter(|e| e.tag() == "html")
}

fn page_has_heading_one(ix: &Index, scope: Scope) -> Vec<Hit> {
    if scope != Scope::Document {
        return Vec::new();
    }
    let levels: Vec<u8> = ix.els.iter().filter(|e| !e.hidden).filter_map(|e| heading_level(e.node)).collect();
    if levels.is_empty() || levels.contains(&1) {
        return Vec::new();
    }
    html_elements(ix)
        .take(1)
        .map(|e| Hit::one(&e.path, "page has headings but none at level one", "Add an h1 that names the main content."))
        .collect()
}

fn heading_order(ix: &Index, _: Scope) -> Vec<Hit> {
    let mut out = Vec::new();
    let mut prev: Option<u8> = None;
    for e in ix.els.iter().filter(|e| !e.hidden) {
        let Some(level) = heading_level(e.node) else { continue };
        if let Some(p) = prev {
            if level > p + 1 {
                out.push(Hit::one(&e.path, format!("heading level jumps from {p} to {level}"), "Use heading levels that increase by one."));
            }
        }
        prev = Some(level);
    }
    out
}

/// Roles whose descendants are presentational; a focusable descendant is
/// unreachable for assistive technology.
const ATOMIC_ROLES: &[&str] = &[
    "button", "checkbox", "radio", "switch", "tab", "menuitem", "menuitemcheckbox",
    "menuitemradio", "option", "slider", "scrollbar", "progressbar", "meter", "img",
];

fn nested_interactive(ix: &Index, _: Scope) -> Vec<Hit> {
    let mut out = Vec::new();
    for e in ix.els.iter().filter(|e| !e.hidden) {
        let Some(el) = e.node.as_element() else { continue };
        let atomic = match el.role() {
            Some(r) => ATOMIC_ROLES.contains(&r.as_str()),
            None => el.name == "button",
        };
        if !atomic {
            continue;
        }
        let nested = e.node.descendants().skip(1).any(is_focusable);
        if nested {
            out.push(Hit::one(&e.path, "interactive control contains a focusable element", "Remove the outer role or move the inner control out, labelling it directly."));
        }
    }
    out
}

const REQUIRED_ATTRS: &[(&str, &[&str])] = &[
    ("checkbox", &["aria-checked"]),
    ("radio", &["aria-checked"]),
    ("switch", &["aria-checked"]),
    ("menuitemcheckbox", &["aria-checked"]),
    ("menuitemradio", &["aria-checked"]),
    ("combobox", &["aria-expanded"]),
    ("slider", &["aria-valuenow"]),
    ("scrollbar", &["aria-controls", "aria-valuenow"]),
    ("heading", &["aria-level"]),
    ("separator", &[]),
];

/// Native elements that already carry the state a role would require.
fn native_semantics(node: &Node, role: &str) -> bool {
    match (node.tag().unwrap_or_default(), role) {
        ("input", "checkbox" | "radio" | "switch") => matches!(input_type(node).as_str(), "checkbox" | "radio"),
        ("input", "slider") => input_type(node) == "range",
        (t, "heading") => heading_level(node).is_some() && t.len() == 2 && t.starts_with('h'),
        _ => false,
    }
}

fn aria_required_attr(ix: &Index, _: Scope) -> Vec<Hit> {
    let mut out = Vec::new();
    for e in &ix.els {
        let Some(role) = e.node.as_element().and_then(|el| el.role()) else { continue };
        let Some((_, required)) = REQUIRED_ATTRS.iter().find(|(r, _)| *r == role) else { continue };
        if native_semantics(e.node, &role) {
            continue;
        }
        let missing: Vec<&str> = required.iter().copied().filter(|a| nonempty(e.attr(a)).is_none()).collect();
        if !missing.is_empty() {
            out.push(Hit::one(&e.path, format!("role=\"{role}\" is missing {}", missing.join(", ")), "Add the ARIA attributes the role requires."));
        }
    }
    out
}

const LANDMARK_ROLES: &[&str] = &["banner", "navigation", "contentinfo", "complementary", "region", "search", "form"];

fn landmark_one_main(ix: &Index, scope: Scope) -> Vec<Hit> {
    if scope != Scope::Document {
        return Vec::new();
    }
    let mut has_main = false;
    let mut other = false;
    for e in &ix.els {
        let role = e.node.as_element().and_then(|el| el.role());
        match (role.as_deref(), e.tag()) {
            (Some("main"), _) | (None, "main") => has_main = true,
            (Some(r), _) if LANDMARK_ROLES.contains(&r) => other = true,
            (None, "header" | "nav" | "footer" | "aside") => other = true,
            _ => {}
        }
    }
    if has_main || !other {
        return Vec::new();
    }
    html_elements(ix)
        .take(1)
        .map(|e| Hit::one(&e.path, "page uses landmarks but has no main landmark", "Wrap the primary content in a main element."))
        .collect()
}

fn avoid_inline_spacing(ix: &Index, _: Scope) -> Vec<Hit> {
    ix.els
        .iter()
        .filter_map(|e| {
            let props: Vec<String> = inline_style(e.node)
                .into_iter()
                .filter(|d| d.important && matches!(d.property.as_str(), "line-height" | "letter-spacing" | "word-spacing"))
                .map(|d| d.property)
                .collect();
            (!props.is_empty()).then(|| {
                Hit::one(&e.path, format!("!important inline {}", props.join(", ")), "Drop !important from inline text-spacing properties.")
            })
        })
        .collect()
}

/// Inline font size in px, inherited; relative units resolve against 16px.
fn font_size_px(ix: &Index, path: &NodePath) -> Option<f64> {
    for n in ix.doc.ancestry(path).iter().rev() {
        for d in inline_style(n).iter().rev() {
            if d.property == "font-size" {
                if let Some(px) = parse_length_px(&d.value) {
                    return Some(px);
                }
            }
        }
    }
    None
}

fn parse_length_px(v: &str) -> Option<f64> {
    let v = v.trim().to_ascii_lowercase();
    let (num, factor) = if let Some(n) = v.strip_suffix("px") {
        (n, 1.0)
    } else if let Some(n) = v.strip_suffix("pt") {
        (n, 4.0 / 3.0)
    } else if let Some(n) = v.strip_suffix("rem") {
        (n, 16.0)
    } else if let Some(n) = v.strip_suffix("em") {
        (n, 16.0)
    } else {
        let n = v.strip_suffix('%')?;
        (n, 0.16)
    };
    num.trim().parse::<f64>().ok().filter(|x| x.is_finite() && *x >= 0.0).map(|x| x * factor)
}

fn is_bold(ix: &Index, path: &NodePath) -> bool {
    for n in ix.doc.ancestry(path).iter().rev() {
        for d in inline_style(n).iter().rev() {
            if d.property == "font-weight" {
                let w = d.value.to_ascii_lowercase();
                return w == "bold" || w == "bolder" || w.parse::<f64>().is_ok_and(|x| x >= 700.0);
            }
        }
    }
    false
}

fn color_contrast(ix: &Index, _: Scope) -> Vec<Hit> {
    let mut out = Vec::new();
    for e in &ix.els {
        if e.hidden || e.unrendered || !e.node.has_direct_text() || e.node.as_element().is_some_and(|el| el.has_attr("disabled")) {
            continue;
        }
        let Some(r) = ix.doc.node_ref(e.path.clone()) else { continue };
        let Ok((fg, bg)) = resolve_colors(ix.doc, &r) else { continue };
        let ratio = contrast_ratio(fg, bg);
        let size = font_size_px(ix, &e.path).unwrap_or(16.0);
        let large = size >= 24.0 || (size >= 18.66 && is_bold(ix, &e.path));
        let threshold = if large { 3.0 } else { 4.5 };
        if ratio < threshold {
            out.push(Hit {
                paths: vec![e.path.clone()],
                detail: format!("contrast {ratio:.2}:1 for {} on {} is below {threshold}:1", fg.to_hex(), bg.to_hex()),
                advice: "Change the foreground or background color so the contrast meets the threshold.",
                supplementary: Some(SupplementaryInfo::colors(fg, bg)),
            });
        }
    }
    out
}

fn scrollable_region_focusable(ix: &Index, _: Scope) -> Vec<Hit> {
    let mut out = Vec::new();
    for e in ix.els.iter().filter(|e| !e.hidden && !e.unrendered) {
        let Some(el) = e.node.as_element() else { continue };
        let overflow = inline_style(e.node).iter().any(|d| {
            matches!(d.property.as_str(), "overflow" | "overflow-x" | "overflow-y")
                && d.value.split_ascii_whitespace().any(|v| matches!(v.to_ascii_lowercase().as_str(), "auto" | "scroll"))
        });
        let scroll_class = el
            .attr("class")
            .is_some_and(|c| c.split_ascii_whitespace().any(|t| t.to_ascii_lowercase().contains("scroll")));
        if !(overflow || scroll_class) || el.has_attr("tabindex") {
            continue;
        }
        let has_content = e.node.descendants().skip(1).any(|n| n.as_element().is_some() || n.has_direct_text())
            || e.node.has_direct_text();
        let has_focusable = e.node.descendants().skip(1).any(is_focusable);
        if has_content && !has_focusable {
            out.push(Hit::one(&e.path, "scrollable region cannot be reached with the keyboard", "Add tabindex=\"0\" so keyboard users can scroll the region."));
        }
    }
    out
}
