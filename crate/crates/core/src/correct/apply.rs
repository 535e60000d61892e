//! Writing chosen corrections back into a document.

use std::collections::HashSet;

use crate::dom::{find_segment, parse_fragment_nodes, Document, HtmlSnippet, Node, NodePath};

use super::{CorrectionOutcome, Source};

#[derive(Debug, Clone)]
pub struct ApplyResult {
    pub document: Document,
    /// Number of outcomes written into the document.
    pub applied: usize,
    pub warnings: Vec<String>,
}

/// How a snippet relates to the element it was grounded on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fit {
    /// The snippet is the whole element.
    Whole,
    /// The snippet is only the start tag.
    StartTag,
}

fn fit(node: &Node, snippet: &HtmlSnippet) -> Option<Fit> {
    node.as_element()?;
    let norm = node.normalized();
    if norm == snippet.normalized {
        Some(Fit::Whole)
    } else if !snippet.normalized.is_empty() && norm.starts_with(&snippet.normalized) && !snippet.normalized.contains("</") {
        Some(Fit::StartTag)
    } else {
        None
    }
}

fn path_hint(violation_id: &str) -> Option<NodePath> {
    violation_id.rsplit_once(':').and_then(|(_, p)| NodePath::parse(p)).filter(|p| !p.0.is_empty())
}

/// Locates one snippet, preferring the hinted path, then the first unused
/// element whose canonical form matches, then the minimal containing element.
fn locate(doc: &Document, snippet: &HtmlSnippet, hint: Option<&NodePath>, used: &HashSet<NodePath>) -> Option<(NodePath, Fit)> {
    if let Some(p) = hint.filter(|p| !used.contains(*p)) {
        if let Some(f) = doc.node_at(p).and_then(|n| fit(n, snippet)) {
            return Some((p.clone(), f));
        }
    }
    for (p, n) in doc.elements() {
        if used.contains(&p) {
            continue;
        }
        if let Some(f) = fit(n, snippet) {
            return Some((p, f));
        }
    }
    let r = find_segment(doc, snippet)?;
    let p = r.path().clone();
    (!used.contains(&p)).then_some((p, Fit::Whole))
}

fn elements_only(nodes: &[Node]) -> Vec<Node> {
    nodes.iter().filter(|n| n.as_element().is_some()).cloned().collect()
}

fn same_children(a: &Node, b: &Node) -> bool {
    let norm = |n: &Node| n.children.iter().map(Node::normalized).collect::<String>();
    norm(a) == norm(b)
}

/// Writes `replacement` over the node at `path`; returns how many nodes now
/// occupy its slot.
fn write(doc: &mut Document, path: &NodePath, fit: Fit, replacement: Vec<Node>) -> Option<usize> {
    let current = doc.node_at(path)?.clone();
    if let [single] = replacement.as_slice() {
        let same_tag = single.tag() == current.tag();
        if same_tag && (fit == Fit::StartTag || same_children(single, &current)) {
            let attrs = single.as_element()?.attrs.clone();
            doc.node_at_mut(path)?.as_element_mut()?.attrs = attrs;
            return Some(1);
        }
    }
    let n = replacement.len();
    doc.replace_node(path, replacement).ok()?;
    Some(n)
}

/// A node already rewritten by an earlier outcome, with its pre-correction
/// form so later outcomes addressing the original can still be merged in.
struct Touched {
    path: NodePath,
    base: Node,
}

/// Keeps recorded paths valid after the node at `at` became `count` nodes.
fn remap(touched: &mut Vec<Touched>, at: &NodePath, count: usize) {
    let Some((&idx, parent)) = at.0.split_last() else { return };
    touched.retain(|t| !at.is_ancestor_of(&t.path) && (count > 0 || &t.path != at));
    for t in touched.iter_mut() {
        let p = &mut t.path.0;
        if p.len() > parent.len() && p.starts_with(parent) && p[parent.len()] > idx {
            let i = parent.len();
            p[i] = p[i] + count - 1;
        }
    }
}

/// Merges `theirs` into `current`, both derived from `base`: attributes and
/// children changed by `theirs` win, everything else keeps `current`.
fn merge(base: &Node, current: &Node, theirs: &Node, shallow: bool, conflicts: &mut Vec<String>) -> Node {
    let mut out = current.clone();
    let (Some(b), Some(t)) = (base.as_element(), theirs.as_element()) else {
        return theirs.clone();
    };
    let mut names: Vec<&str> = b.attrs.iter().chain(&t.attrs).map(|(n, _)| n.as_str()).collect();
    names.dedup();
    let mut seen = HashSet::new();
    let el = out.as_element_mut().expect("current is an element");
    for name in names.into_iter().filter(|n| seen.insert(*n)) {
        let (bv, tv) = (b.attr(name), t.attr(name));
        if bv == tv {
            continue;
        }
        let cv = el.attr(name).map(str::to_string);
        if cv.as_deref() != bv && cv.as_deref() != tv {
            conflicts.push(format!("attribute {name}: {:?} replaced by {:?}", cv.unwrap_or_default(), tv.unwrap_or_default()));
        }
        match tv {
            Some(v) => el.set_attr(name, v),
            None => {
                el.remove_attr(name);
            }
        }
    }
    if !shallow && !same_children(theirs, base) {
        if !same_children(current, base) {
            conflicts.push("content replaced by a later correction".into());
        }
        out.children = theirs.children.clone();
    }
    out
}

/// Applies outcomes in order. Outcomes that kept the original code are
/// skipped; snippets that can no longer be found are reported as warnings.
/// An outcome addressing a node an earlier outcome already rewrote is
/// merged into the rewritten node.
pub fn apply_corrections(doc: &Document, outcomes: &[CorrectionOutcome]) -> ApplyResult {
    let mut doc = doc.clone();
    let mut warnings = Vec::new();
    let mut applied = 0;
    let mut touched: Vec<Touched> = Vec::new();

    for o in outcomes {
        if o.source == Source::Original {
            continue;
        }
        let snippets: Vec<HtmlSnippet> = o.affected_html.iter().map(HtmlSnippet::new).collect();
        let hint = path_hint(&o.violation_id);
        let mut used = HashSet::new();
        let mut targets = Vec::new();
        for (i, s) in snippets.iter().enumerate() {
            let found = locate(&doc, s, if i == 0 { hint.as_ref() } else { None }, &used).map(|(p, f)| (p, f, None)).or_else(|| {
                touched.iter().enumerate().find_map(|(k, t)| {
                    let f = fit(&t.base, s)?;
                    (!used.contains(&t.path)).then(|| (t.path.clone(), f, Some(k)))
                })
            });
            match found {
                Some((p, f, prior)) => {
                    used.insert(p.clone());
                    targets.push((p, f, prior));
                }
                None => warnings.push(format!("{}: affected element {} not found; skipped", o.violation_id, i + 1)),
            }
        }
        if targets.is_empty() {
            continue;
        }
        if targets.len() < snippets.len() {
            // Partial grounding would leave a half-applied correction.
            warnings.push(format!("{}: correction not applied", o.violation_id));
            continue;
        }

        let nodes = parse_fragment_nodes(&o.chosen_html);
        let elements = elements_only(&nodes);
        let mut plan: Vec<(NodePath, Fit, Option<usize>, Vec<Node>)> = if targets.len() > 1 && elements.len() == targets.len() {
            targets.into_iter().zip(elements).map(|((p, f, k), e)| (p, f, k, vec![e])).collect()
        } else {
            if targets.len() > 1 {
                warnings.push(format!(
                    "{}: {} replacement element(s) for {} targets; replaced the first target only",
                    o.violation_id,
                    elements.len(),
                    targets.len()
                ));
            }
            let (p, f, k) = targets.swap_remove(0);
            let single = if elements.len() == 1 { elements } else { nodes };
            vec![(p, f, k, single)]
        };
        // Later siblings first, so earlier paths stay valid.
        plan.sort_by(|a, b| b.0.cmp(&a.0));
        let mut ok = true;
        for (p, f, prior, mut r) in plan {
            let Some(current) = doc.node_at(&p).cloned() else {
                ok = false;
                warnings.push(format!("{}: target {p} disappeared during application", o.violation_id));
                continue;
            };
            let base = match prior {
                Some(k) => {
                    let base = touched[k].base.clone();
                    if let [single] = r.as_slice() {
                        if single.tag() == base.tag() {
                            let mut conflicts = Vec::new();
                            let merged = merge(&base, &current, single, f == Fit::StartTag, &mut conflicts);
                            for c in conflicts {
                                warnings.push(format!("{}: conflicts with an earlier correction at {p}: {c}", o.violation_id));
                            }
                            r = vec![merged];
                        }
                    }
                    touched.remove(k);
                    base
                }
                None => current,
            };
            match write(&mut doc, &p, if prior.is_some() { Fit::Whole } else { f }, r) {
                Some(count) => {
                    remap(&mut touched, &p, count);
                    if count == 1 {
                        touched.push(Touched { path: p, base });
                    }
                }
                None => {
                    ok = false;
                    warnings.push(format!("{}: target {p} disappeared during application", o.violation_id));
                }
            }
        }
        if ok {
            applied += 1;
        }
    }
    ApplyResult { document: doc, applied, warnings }
}
