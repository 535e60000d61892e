use std::collections::BTreeSet;

use a11y_mend::detect::{detect_static, run_rule, static_score};
use a11y_mend::dom::parse_document;
use a11y_mend::taxonomy::Registry;
use a11y_mend::violation::PageContext;

const BROKEN: &str = include_str!("../data/corpus/vitamins_broken.html");
const FIXED: &str = include_str!("../data/corpus/vitamins_fixed.html");

fn types(html: &str) -> BTreeSet<String> {
    detect_static(&parse_document(html), &PageContext::default(), &Registry::bundled())
        .into_iter()
        .map(|v| v.type_name)
        .collect()
}

#[test]
fn broken_page_reports_the_eight_annotated_types() {
    let expected: BTreeSet<String> = [
        "html-has-lang",
        "meta-viewport",
        "color-contrast",
        "scrollable-region-focusable",
        "empty-table-header",
        "link-name",
        "nested-interactive",
        "button-name",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    assert_eq!(types(BROKEN), expected);
}

#[test]
fn fixed_page_is_clean() {
    let found = detect_static(&parse_document(FIXED), &PageContext::default(), &Registry::bundled());
    assert!(found.is_empty(), "{:#?}", found.iter().map(|v| (&v.id, v.html())).collect::<Vec<_>>());
}

#[test]
fn root_rule_hits_the_html_element() {
    let d = parse_document(BROKEN);
    let hits = run_rule("html-has-lang", &d).unwrap();
    assert_eq!(hits.len(), 1);
    assert!(d.resolve(&hits[0].nodes[0]).unwrap().is_tag("html"));
}

#[test]
fn button_fragment_scores() {
    let r = Registry::bundled();
    let ctx = PageContext::default();
    let broken = "<button class=\"subscribe-button\" type=\"button\">\n    <img src=\"https://ScreenShot.png\">\n    </button>";
    let fixed = "<button class=\"subscribe\" type=\"button\" aria-label=\"Subscribe to Vitamin Newsletter\">\n    <img src=\"https://ScreenShot.png\" alt=\"Subscribe Button\">\n    </button>";
    assert_eq!(static_score(broken, &r, &ctx), 5);
    assert_eq!(static_score(fixed, &r, &ctx), 0);
}

#[test]
fn fixed_page_scores_lower() {
    let r = Registry::bundled();
    let ctx = PageContext::default();
    let score = |h: &str| -> u32 {
        detect_static(&parse_document(h), &ctx, &r).iter().map(|v| v.score).sum()
    };
    assert!(score(FIXED) < score(BROKEN));
}

#[test]
fn reports_are_deterministic() {
    let r = Registry::bundled();
    let ctx = PageContext::default();
    let a = detect_static(&parse_document(BROKEN), &ctx, &r);
    let b = detect_static(&parse_document(BROKEN), &ctx, &r);
    assert_eq!(a, b);
}
