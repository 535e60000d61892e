use std::sync::Arc;

use a11y_mend::correct::{
    apply_corrections, correct_all, correct_violation, correct_with, CorrectionOutcome, Scorer, Source, Strategy,
};
use a11y_mend::detect::{detect_static, static_score};
use a11y_mend::dom::parse_document;
use a11y_mend::llm::mock::MockProvider;
use a11y_mend::llm::{Gateway, LlmError, TemplateKind};
use a11y_mend::taxonomy::Registry;
use a11y_mend::violation::{DetectedViolation, PageContext};

const BROKEN: &str = include_str!("../data/corpus/vitamins_broken.html");

const FIXED_BUTTON: &str = r#"<button class="subscribe-button" type="button"><img src="https://ScreenShot.png" alt="Subscribe"></button>"#;
const WORSE_BUTTON: &str = r#"<button class="subscribe-button" type="button"></button><img src="https://ScreenShot.png">"#;
const SAME_BUTTON: &str = "<button class=\"subscribe-button\" type=\"button\">\n    <img src=\"https://ScreenShot.png\">\n    </button>";

fn marked(code: &str) -> String {
    format!("Reasoning first.\n###START###\n{code}\n###END###\n###START1###\n90\n###END1###\n###START2###\nalt added\n###END2###")
}

fn violations() -> Vec<DetectedViolation> {
    detect_static(&parse_document(BROKEN), &PageContext::default(), &Registry::bundled())
}

fn button_violation() -> DetectedViolation {
    violations().into_iter().find(|v| v.type_name == "button-name").expect("button-name present")
}

/// Replies with `first` to initial prompts and `second` to corrective ones.
fn two_step(first: &'static str, second: &'static str) -> (Arc<MockProvider>, Gateway) {
    let mock = Arc::new(MockProvider::from_fn(true, move |b| {
        Ok(match b.template {
            TemplateKind::Initial => marked(first),
            TemplateKind::Corrective => marked(second),
            _ => String::new(),
        })
    }));
    let gw = Gateway::new(mock.clone());
    (mock, gw)
}

fn run(first: &'static str, second: &'static str) -> (CorrectionOutcome, u64) {
    let registry = Registry::bundled();
    let (mock, gw) = two_step(first, second);
    let out = correct_violation(&button_violation(), &registry, &gw, &Scorer::new(&registry));
    assert_eq!(gw.calls(), mock.calls());
    (out, mock.calls())
}

#[test]
fn perfect_first_answer_stops_after_one_call() {
    let (out, calls) = run(FIXED_BUTTON, SAME_BUTTON);
    assert_eq!(calls, 1);
    assert_eq!(out.source, Source::Llm1);
    assert_eq!((out.scores.original, out.scores.llm1, out.scores.llm2), (5, Some(0), None));
    assert_eq!(out.final_score, 0);
    assert_eq!(out.confidence, Some(90));
    assert!(!out.flags.not_fixed);
}

#[test]
fn reprompt_repairs_a_regression() {
    let (out, calls) = run(WORSE_BUTTON, FIXED_BUTTON);
    assert_eq!(calls, 2);
    assert_eq!(out.source, Source::Llm2);
    assert_eq!((out.scores.original, out.scores.llm1, out.scores.llm2), (5, Some(10), Some(0)));
}

#[test]
fn two_regressions_keep_the_original() {
    let (out, _) = run(WORSE_BUTTON, WORSE_BUTTON);
    assert_eq!(out.source, Source::Original);
    assert!(out.flags.not_fixed);
    assert_eq!(out.final_score, 5);
    assert_eq!(out.chosen_html, button_violation().html());
}

#[test]
fn full_tie_prefers_the_reprompt() {
    let (out, _) = run(SAME_BUTTON, SAME_BUTTON);
    assert_eq!((out.scores.original, out.scores.llm1, out.scores.llm2), (5, Some(5), Some(5)));
    assert_eq!(out.source, Source::Llm2);
}

#[test]
fn refusals_are_invalid_and_fall_back() {
    let registry = Registry::bundled();
    let mock = Arc::new(MockProvider::constant("I'm sorry, I can't help with that."));
    let gw = Gateway::new(mock.clone());
    let out = correct_violation(&button_violation(), &registry, &gw, &Scorer::new(&registry));
    assert_eq!(mock.calls(), 2);
    assert_eq!(out.source, Source::Original);
    assert!(out.flags.not_fixed && out.flags.invalid_llm1 && out.flags.invalid_llm2);
    assert_eq!(out.scores.llm1, Some(5));
}

#[test]
fn provider_failure_is_recorded_not_raised() {
    let registry = Registry::bundled();
    let mock = Arc::new(MockProvider::from_fn(true, |_| Err(LlmError::Rejected("quota".into()))));
    let gw = Gateway::new(mock);
    let out = correct_violation(&button_violation(), &registry, &gw, &Scorer::new(&registry));
    assert_eq!(out.source, Source::Original);
    assert!(out.error.as_deref().unwrap().contains("quota"));
}

#[test]
fn no_reprompt_ablation_makes_one_call() {
    let registry = Registry::bundled();
    let (mock, gw) = two_step(WORSE_BUTTON, FIXED_BUTTON);
    let out = correct_with(Strategy::AccessGuruNoReprompt, &button_violation(), &registry, &gw, &Scorer::new(&registry));
    assert_eq!(mock.calls(), 1);
    assert_eq!(out.source, Source::Original);
}

#[test]
fn baselines_keep_regressions() {
    let registry = Registry::bundled();
    let mock = Arc::new(MockProvider::constant(format!("Here you go:\n```html\n{WORSE_BUTTON}\n```")));
    let gw = Gateway::new(mock.clone());
    let out = correct_with(Strategy::ZeroShot, &button_violation(), &registry, &gw, &Scorer::new(&registry));
    assert_eq!(mock.calls(), 1);
    assert_eq!(out.source, Source::Llm1);
    assert_eq!(out.final_score, 10);
}

#[test]
fn correct_all_preserves_order() {
    let registry = Registry::bundled();
    let vs = violations();
    let gw = Gateway::new(Arc::new(MockProvider::constant("no code")));
    let outs = correct_all(Strategy::AccessGuru, &vs, &registry, &gw, &Scorer::new(&registry));
    let ids: Vec<_> = outs.iter().map(|o| o.violation_id.clone()).collect();
    let expected: Vec<_> = vs.iter().map(|v| v.id.clone()).collect();
    assert_eq!(ids, expected);
    assert_eq!(gw.calls(), 2 * vs.len() as u64);
}

#[test]
fn applying_the_reference_fixes_cleans_the_page() {
    let outcomes: Vec<CorrectionOutcome> =
        serde_json::from_str(include_str!("../data/fixtures/vitamins_corrections.json")).unwrap();
    let doc = parse_document(BROKEN);
    let result = apply_corrections(&doc, &outcomes);
    assert!(result.warnings.is_empty(), "{:?}", result.warnings);
    assert_eq!(result.applied, outcomes.len());
    let html = result.document.to_html();
    let left = detect_static(&parse_document(&html), &PageContext::default(), &Registry::bundled());
    assert!(left.is_empty(), "{:#?}", left.iter().map(|v| (&v.id, v.html())).collect::<Vec<_>>());
    assert!(static_score(&html, &Registry::bundled(), &PageContext::default()) == 0);
}
