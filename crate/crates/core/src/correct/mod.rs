//! Score-guided correction: prompt, score, re-prompt once, and pick the best
//! of the original and the two model outputs.

mod apply;
pub(crate) mod score;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dom::parse_fragment_nodes;
use crate::llm::prompts::{build_baseline_prompt, build_corrective_reprompt, build_initial_correction_prompt, BaselineStrategy};
use crate::llm::{extract_first_html, strip_code_fence, Gateway, LlmResponse};
use crate::taxonomy::Registry;
use crate::violation::DetectedViolation;

pub use apply::{apply_corrections, ApplyResult};
pub use score::{Scored, Scorer, SemanticRecheck};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Source {
    #[serde(rename = "LLM1")]
    Llm1,
    #[serde(rename = "LLM2")]
    Llm2,
    Original,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scores {
    pub original: u32,
    pub llm1: Option<u32>,
    pub llm2: Option<u32>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Flags {
    pub not_fixed: bool,
    pub invalid_llm1: bool,
    pub invalid_llm2: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CorrectionOutcome {
    pub violation_id: String,
    /// The snippets the correction replaces.
    pub affected_html: Vec<String>,
    pub chosen_html: String,
    pub source: Source,
    pub scores: Scores,
    pub flags: Flags,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explanation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub final_score: u32,
}

impl CorrectionOutcome {
    fn original(v: &DetectedViolation, scores: Scores, flags: Flags) -> Self {
        Self {
            violation_id: v.id.clone(),
            affected_html: v.html_elements(),
            chosen_html: v.html(),
            source: Source::Original,
            scores,
            flags: Flags { not_fixed: true, ..flags },
            confidence: None,
            explanation: None,
            error: None,
            final_score: scores.original,
        }
    }

    fn chosen(v: &DetectedViolation, source: Source, html: String, resp: &LlmResponse, scores: Scores, flags: Flags, score: u32) -> Self {
        Self {
            violation_id: v.id.clone(),
            affected_html: v.html_elements(),
            chosen_html: html,
            source,
            scores,
            flags,
            confidence: resp.confidence,
            explanation: resp.explanation.clone(),
            error: None,
            final_score: score,
        }
    }

    fn with_error(mut self, e: impl ToString) -> Self {
        self.error = Some(e.to_string());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Valid,
    Malformed,
    AdviceOnly,
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationResult {
    pub verdict: Verdict,
    pub detail: String,
}

impl ValidationResult {
    pub fn is_valid(&self) -> bool {
        self.verdict == Verdict::Valid
    }
}

/// Whether a model's code is usable markup.
pub fn validate_llm_correction(text: Option<&str>) -> ValidationResult {
    let Some(text) = text.map(strip_code_fence).filter(|t| !t.is_empty()) else {
        return ValidationResult { verdict: Verdict::Empty, detail: "no correction text".into() };
    };
    let elements = parse_fragment_nodes(text).iter().filter(|n| n.as_element().is_some()).count();
    if elements > 0 {
        return ValidationResult { verdict: Verdict::Valid, detail: format!("{elements} top-level element(s)") };
    }
    if text.contains('<') {
        ValidationResult { verdict: Verdict::Malformed, detail: "markup without any element".into() }
    } else {
        ValidationResult { verdict: Verdict::AdviceOnly, detail: "textual advice only".into() }
    }
}

/// Verdict on a marked response; answers without code markers are judged on
/// their raw text but never count as valid.
fn validate_response(resp: &LlmResponse) -> ValidationResult {
    match &resp.extracted_code {
        Some(code) => validate_llm_correction(Some(code)),
        None => {
            let raw = validate_llm_correction(Some(&resp.raw_text));
            match raw.verdict {
                Verdict::Valid => ValidationResult { verdict: Verdict::Malformed, detail: "code markers missing".into() },
                _ => raw,
            }
        }
    }
}

/// Argmin over the three scores; ties go to the most recent output.
pub fn select_best(v_score: u32, s1: u32, s2: u32) -> Source {
    if s2 <= s1 && s2 <= v_score {
        Source::Llm2
    } else if s1 <= v_score {
        Source::Llm1
    } else {
        Source::Original
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    AccessGuru,
    AccessGuruNoReprompt,
    Contextual,
    ReAct,
    ZeroShot,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::AccessGuru,
        Strategy::AccessGuruNoReprompt,
        Strategy::Contextual,
        Strategy::ReAct,
        Strategy::ZeroShot,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::AccessGuru => "AccessGuru",
            Strategy::AccessGuruNoReprompt => "AccessGuruNoReprompt",
            Strategy::Contextual => "Contextual",
            Strategy::ReAct => "ReAct",
            Strategy::ZeroShot => "ZeroShot",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let k = s.trim().to_ascii_lowercase().replace(['-', '_'], "");
        Strategy::ALL.into_iter().find(|x| x.as_str().to_ascii_lowercase() == k)
    }

    /// Whether the strategy can fall back to the original code.
    pub fn guards_regressions(self) -> bool {
        matches!(self, Strategy::AccessGuru | Strategy::AccessGuruNoReprompt)
    }
}

/// A candidate after validation and scoring. Invalid candidates report the
/// original score and never win a selection.
struct Candidate {
    resp: LlmResponse,
    html: Option<String>,
    scored: Option<Scored>,
}

impl Candidate {
    fn evaluate(resp: LlmResponse, v: &DetectedViolation, scorer: &Scorer) -> Self {
        let valid = validate_response(&resp).is_valid();
        let html = valid.then(|| strip_code_fence(resp.extracted_code.as_deref().unwrap_or_default()).to_string());
        let scored = html.as_deref().map(|h| scorer.candidate(v, h));
        Self { resp, html, scored }
    }

    fn selection_score(&self) -> u32 {
        self.scored.as_ref().map_or(u32::MAX, |s| s.score)
    }

    fn reported(&self, original: u32) -> u32 {
        self.scored.as_ref().map_or(original, |s| s.score)
    }

    fn invalid(&self) -> bool {
        self.html.is_none()
    }
}

/// Full loop: initial prompt, corrective re-prompt when needed, selection.
pub fn correct_violation(v: &DetectedViolation, registry: &Registry, gateway: &Gateway, scorer: &Scorer) -> CorrectionOutcome {
    let original = scorer.original(v).score;
    let mut scores = Scores { original, llm1: None, llm2: None };
    let bundle = match build_initial_correction_prompt(v, registry) {
        Ok(b) => b,
        Err(e) => return CorrectionOutcome::original(v, scores, Flags::default()).with_error(e),
    };
    let first = match gateway.ask(&bundle) {
        Ok(r) => Candidate::evaluate(r, v, scorer),
        Err(e) => return CorrectionOutcome::original(v, scores, Flags::default()).with_error(e),
    };
    scores.llm1 = Some(first.reported(original));
    let mut flags = Flags { invalid_llm1: first.invalid(), ..Flags::default() };
    if first.selection_score() == 0 {
        let html = first.html.clone().expect("scored candidates are valid");
        return CorrectionOutcome::chosen(v, Source::Llm1, html, &first.resp, scores, flags, 0);
    }

    let mut residual = first.scored.as_ref().map(|s| s.residual.clone()).unwrap_or_default();
    if residual.is_empty() {
        residual.push(v.clone());
    }
    let prior = first.resp.clone();
    let second = build_corrective_reprompt(v, registry, Some(&prior), &residual)
        .map_err(|e| e.to_string())
        .and_then(|b| gateway.ask(&b).map_err(|e| e.to_string()));
    let (second, error) = match second {
        Ok(r) => (Some(Candidate::evaluate(r, v, scorer)), None),
        Err(e) => (None, Some(e)),
    };
    flags.invalid_llm2 = second.as_ref().is_none_or(Candidate::invalid);
    scores.llm2 = second.as_ref().map(|c| c.reported(original));
    let s2 = second.as_ref().map_or(u32::MAX, Candidate::selection_score);
    let outcome = if s2 == 0 {
        let c = second.as_ref().expect("scored");
        CorrectionOutcome::chosen(v, Source::Llm2, c.html.clone().expect("valid"), &c.resp, scores, flags, 0)
    } else {
        match select_best(original, first.selection_score(), s2) {
            Source::Llm2 => {
                let c = second.as_ref().expect("selected");
                CorrectionOutcome::chosen(v, Source::Llm2, c.html.clone().expect("valid"), &c.resp, scores, flags, s2)
            }
            Source::Llm1 => {
                let s1 = first.selection_score();
                CorrectionOutcome::chosen(v, Source::Llm1, first.html.clone().expect("valid"), &first.resp, scores, flags, s1)
            }
            Source::Original => CorrectionOutcome::original(v, scores, flags),
        }
    };
    match error {
        Some(e) => outcome.with_error(e),
        None => outcome,
    }
}

/// Single prompt, keeping the output only when it is no worse than the
/// original.
pub fn correct_without_reprompt(v: &DetectedViolation, registry: &Registry, gateway: &Gateway, scorer: &Scorer) -> CorrectionOutcome {
    let original = scorer.original(v).score;
    let mut scores = Scores { original, llm1: None, llm2: None };
    let bundle = match build_initial_correction_prompt(v, registry) {
        Ok(b) => b,
        Err(e) => return CorrectionOutcome::original(v, scores, Flags::default()).with_error(e),
    };
    let first = match gateway.ask(&bundle) {
        Ok(r) => Candidate::evaluate(r, v, scorer),
        Err(e) => return CorrectionOutcome::original(v, scores, Flags::default()).with_error(e),
    };
    scores.llm1 = Some(first.reported(original));
    let flags = Flags { invalid_llm1: first.invalid(), ..Flags::default() };
    let s1 = first.selection_score();
    if s1 <= original {
        CorrectionOutcome::chosen(v, Source::Llm1, first.html.clone().expect("valid"), &first.resp, scores, flags, s1)
    } else {
        CorrectionOutcome::original(v, scores, flags)
    }
}

/// One comparison prompt; the first HTML in the answer is taken as is.
pub fn correct_baseline(
    strategy: BaselineStrategy,
    v: &DetectedViolation,
    registry: &Registry,
    gateway: &Gateway,
    scorer: &Scorer,
) -> CorrectionOutcome {
    let original = scorer.original(v).score;
    let mut scores = Scores { original, llm1: None, llm2: None };
    let bundle = match build_baseline_prompt(strategy, v, registry) {
        Ok(b) => b,
        Err(e) => return CorrectionOutcome::original(v, scores, Flags::default()).with_error(e),
    };
    let raw = match gateway.complete(&bundle) {
        Ok(r) => r,
        Err(e) => return CorrectionOutcome::original(v, scores, Flags::default()).with_error(e),
    };
    let html = extract_first_html(&raw);
    let verdict = validate_llm_correction(html.as_deref());
    let resp = LlmResponse { raw_text: raw, extracted_code: html.clone(), confidence: None, explanation: None };
    if !verdict.is_valid() {
        scores.llm1 = Some(original);
        return CorrectionOutcome::original(v, scores, Flags { invalid_llm1: true, ..Flags::default() });
    }
    let html = html.expect("valid");
    let s1 = scorer.candidate(v, &html).score;
    scores.llm1 = Some(s1);
    CorrectionOutcome::chosen(v, Source::Llm1, html, &resp, scores, Flags::default(), s1)
}

pub fn correct_with(strategy: Strategy, v: &DetectedViolation, registry: &Registry, gateway: &Gateway, scorer: &Scorer) -> CorrectionOutcome {
    match strategy {
        Strategy::AccessGuru => correct_violation(v, registry, gateway, scorer),
        Strategy::AccessGuruNoReprompt => correct_without_reprompt(v, registry, gateway, scorer),
        Strategy::Contextual => correct_baseline(BaselineStrategy::Contextual, v, registry, gateway, scorer),
        Strategy::ReAct => correct_baseline(BaselineStrategy::ReAct, v, registry, gateway, scorer),
        Strategy::ZeroShot => correct_baseline(BaselineStrategy::ZeroShot, v, registry, gateway, scorer),
    }
}

/// Corrects violations independently and in parallel; output order follows
/// input order.
pub fn correct_all(
    strategy: Strategy,
    violations: &[DetectedViolation],
    registry: &Registry,
    gateway: &Gateway,
    scorer: &Scorer,
) -> Vec<CorrectionOutcome> {
    violations
        .par_iter()
        .map(|v| correct_with(strategy, v, registry, gateway, scorer))
        .collect()
}
