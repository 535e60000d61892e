use std::path::Path;
use std::sync::Arc;

use proptest::prelude::*;

use a11y_mend::correct::{CorrectionOutcome, Flags, Scores, Source, Strategy as Fix};
use a11y_mend::detect::contrast_ratio;
use a11y_mend::dom::{parse_document, ColorValue};
use a11y_mend::eval::{corrected_count, improvement, run_benchmark, BenchmarkOptions};
use a11y_mend::llm::mock::MockProvider;
use a11y_mend::llm::{extract_marked, Gateway, MarkerProtocol};
use a11y_mend::report::load_dataset;
use a11y_mend::semantic::{detect_semantic_report, DiscardReason, ScreenshotRef, SemanticOptions};
use a11y_mend::taxonomy::Registry;
use a11y_mend::violation::PageContext;

fn data(rel: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

fn color() -> impl Strategy<Value = ColorValue> {
    (any::<u8>(), any::<u8>(), any::<u8>()).prop_map(|(r, g, b)| ColorValue::rgb(r, g, b))
}

fn outcome(original: u32, final_score: u32, not_fixed: bool) -> CorrectionOutcome {
    CorrectionOutcome {
        violation_id: "x".into(),
        affected_html: vec!["<p></p>".into()],
        chosen_html: "<p></p>".into(),
        source: if not_fixed { Source::Original } else { Source::Llm1 },
        scores: Scores { original, llm1: Some(final_score), llm2: None },
        flags: Flags { not_fixed, ..Flags::default() },
        confidence: None,
        explanation: None,
        error: None,
        final_score,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn marked_payloads_round_trip(p in "[^#]{0,200}") {
        let m = MarkerProtocol::default();
        let wrapped = format!("{}{p}{}", m.code_start, m.code_end);
        prop_assert_eq!(extract_marked(&wrapped, &m.code_start, &m.code_end), Some(p.clone()));
        let answer = format!("thoughts\n{}\ntail", m.wrap_code(&p));
        prop_assert_eq!(extract_marked(&answer, &m.code_start, &m.code_end), Some(format!("\n{p}\n")));
    }

    #[test]
    fn unmarked_text_extracts_nothing(p in "[^#]{0,200}") {
        let m = MarkerProtocol::default();
        prop_assert_eq!(extract_marked(&p, &m.code_start, &m.code_end), None);
    }

    #[test]
    fn first_of_two_blocks_wins(a in "[^#]{0,80}", b in "[^#]{0,80}") {
        let m = MarkerProtocol::default();
        let text = format!("{start}{a}{end}\n{start}{b}{end}", start = m.code_start, end = m.code_end);
        prop_assert_eq!(extract_marked(&text, &m.code_start, &m.code_end), Some(a.clone()));
    }

    #[test]
    fn contrast_is_symmetric_and_bounded(a in color(), b in color()) {
        let (x, y) = (contrast_ratio(a, b), contrast_ratio(b, a));
        prop_assert_eq!(x, y);
        prop_assert!((1.0..=21.0).contains(&x));
    }

    #[test]
    fn improvement_is_scale_invariant(r in 0.1f64..5.0, f in 0.0f64..5.0, k in 0.1f64..10.0) {
        let a = improvement(r, f).unwrap();
        let b = improvement(r * k, f * k).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn fixing_more_never_lowers_the_count(scores in prop::collection::vec((1u32..=5, any::<bool>()), 1..20), pick in any::<prop::sample::Index>()) {
        let mut outcomes: Vec<_> = scores.iter().map(|&(s, fixed)| outcome(s, if fixed { 0 } else { s }, !fixed)).collect();
        let before = corrected_count(&outcomes);
        let i = pick.index(outcomes.len());
        outcomes[i] = outcome(outcomes[i].scores.original, 0, false);
        prop_assert!(corrected_count(&outcomes) >= before);
    }
}

#[test]
fn grounding_keeps_only_real_snippets_with_known_names() {
    let registry = Registry::bundled();
    let doc = parse_document(include_str!("../data/corpus/vitamins_broken.html"));
    let gw = Gateway::new(Arc::new(MockProvider::load(data("mock/semantic.json")).unwrap()));
    let shot = ScreenshotRef::new(data("dataset/vitamins.png")).unwrap();
    let r = detect_semantic_report(&doc, &shot, &PageContext::default(), &registry, &gw, &SemanticOptions::default()).unwrap();
    assert_eq!(r.violations.len(), 1);
    assert_eq!(r.violations[0].type_name, "image-alt-not-descriptive");
    let reasons: Vec<_> = r.discarded.iter().map(|d| d.discard_reason).collect();
    assert_eq!(reasons, vec![Some(DiscardReason::NoMatchInDocument), Some(DiscardReason::UnknownViolationName)]);
}

#[test]
fn guarded_strategies_never_end_worse() {
    let registry = Registry::bundled();
    let ds = load_dataset(data("dataset/vitamins.json"), &registry).unwrap();
    for mock in ["oracle", "partial", "refusal"] {
        let gw = Gateway::new(Arc::new(MockProvider::load(data(&format!("mock/{mock}.json"))).unwrap()));
        for s in [Fix::AccessGuru, Fix::AccessGuruNoReprompt] {
            let r = run_benchmark(&ds, s, &gw, &registry, &BenchmarkOptions::default()).unwrap();
            assert!(r.r_fix <= r.r_initial, "{mock} {}: {} > {}", s.as_str(), r.r_fix, r.r_initial);
            for e in &r.entries {
                assert!(e.final_score <= e.scores.original, "{mock} {}: {}", s.as_str(), e.violation_id);
            }
        }
    }
}
