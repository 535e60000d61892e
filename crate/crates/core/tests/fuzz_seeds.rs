//! Replays the checked-in fuzz corpus through the fuzz target properties.

use std::path::{Path, PathBuf};

use a11y_mend::dom::{normalize, parse_document};
use a11y_mend::llm::{extract_marked, LlmResponse, MarkerProtocol};
use a11y_mend::semantic::{ground_findings, parse_semantic_findings};
use a11y_mend::taxonomy::Registry;

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .filter_map(|p| String::from_utf8(std::fs::read(&p).unwrap()).ok().map(|t| (p, t)))
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn parse_seeds_reach_a_fixed_point() {
    for (p, text) in seeds("parse") {
        let once = parse_document(&text).to_html();
        assert_eq!(parse_document(&once).to_html(), once, "{}", p.display());
    }
}

#[test]
fn normalize_seeds_are_idempotent() {
    for (p, text) in seeds("normalize") {
        let n = normalize(&text);
        assert_eq!(normalize(&n), n, "{}", p.display());
    }
}

#[test]
fn extract_marked_seeds() {
    let m = MarkerProtocol::default();
    for (p, text) in seeds("extract_marked") {
        if let Some(inner) = extract_marked(&text, &m.code_start, &m.code_end) {
            assert!(text.contains(&inner), "{}", p.display());
        }
        assert!(LlmResponse::parse(&text, &m).confidence.is_none_or(|c| c <= 100));
    }
}

#[test]
fn semantic_finding_seeds_are_all_accounted_for() {
    let page = parse_document("<html><body><img src=\"a.jpg\" alt=\"image\"><a href=\"x\">click here</a></body></html>");
    for (p, text) in seeds("parse_semantic_findings") {
        let findings = parse_semantic_findings(&text);
        let n = findings.len();
        let (kept, discarded) = ground_findings(findings, &page, &Registry::bundled());
        assert_eq!(kept.len() + discarded.len(), n, "{}", p.display());
    }
}
