//! Prompt templates. Fixed segments are constant per template; dynamic
//! segments carry the per-violation values.

use std::path::Path;

use super::wcag::guideline_block;
use super::{Attachment, LlmError, LlmResponse, MarkerProtocol, PromptBundle, Segment, TemplateKind};
use crate::taxonomy::{Category, Registry};
use crate::violation::{DetectedViolation, PageContext};

pub const PERSONA: &str = "You are a Web accessibility expert with strong HTML skills and a deep commitment to fixing accessibility violations. You analyze Web pages, identify issues, and provide corrected HTML that meets WCAG 2.1 standards. You resolve problems like missing alt text, poor heading structure, non-semantic elements, inaccessible forms, and color contrast issues. You transform flawed code into compliant, clean HTML that works with assistive technologies and is fully keyboard-navigable and screen-reader-friendly. Your mission is to deliver expert, immediately usable HTML fixes to make the Web inclusive for all users.";

pub const SEMANTIC_DETECTION_PERSONA: &str = "You are a Web accessibility expert. Your task is to detect semantic accessibility violations in the given HTML Web page. These accessibility violations are often not detectable by standard automated tools and require interpretation of the content’s meaning and user context";

const SEMANTIC_DEFINITION: &str = "A semantic violation occurs when:\n  - Attributes like alt text, language, or link/button labels are present but do not provide meaningful information.\n  - Visual or multimedia content is not described in a way that conveys its purpose to users with disabilities.";

const SEMANTIC_CONTEXT_DOMAIN: &str = "Use the following context in your analysis:\n  - Domain:";
const SEMANTIC_CONTEXT_URL: &str = "  - URL:";
const SEMANTIC_PROVIDED: &str = "You are provided with:\n  - The HTML code of the Web page to analyze.\n  - The full semantic accessibility violation taxonomy.\n  - A screenshot of the rendered view of the Web page.";
const SEMANTIC_INSTRUCTION: &str = "Now, review the HTML and supplementary data. List all semantic accessibility violations you detect, and for each:\n1. Identify the affected HTML element. Enclose the exact HTML snippet using the markers [START] and [END].\n2. Specify the violation name.\nWrite the violation name on the same line, directly after [END].";

const CLARIFY: &str = "Clarify your understanding of the following Web accessibility violation:";
const IMPACT_SCALE: &str = "Impact is a rating determined by the severity of the violation, indicating the extent to which it hinders user interaction with the Web content. The scale is [cosmetic, minor, moderate, serious, critical]";
const SCREENSHOT_TASKS: &str = "Prioritize the attached screenshot of the Web page (which visually shows the UI element with a possible Web accessibility violation).\nYour tasks:\n1. Interpret the visual content of the attached image.\n2. Identify the UI element (e.g., a button or icon) shown in the image.\n3. Determine whether the element is accessible (i.e., if an image element has a meaningful alt text)\n4. Compare your findings with the corresponding HTML provided and highlight any mismatches.\n5. Suggest an accessibility-compliant fix if there's a violation.";
const PRELIMINARY: &str = "Based on your understanding, provide a preliminary correction for the Web accessibility violation based on the following WCAG guideline(s):";
const NO_NEW_VIOLATIONS: &str = "Make sure your generated code corrects the Web accessibility violation without introducing new accessibility violations. Ensure you generate the complete corrected code, not just a snippet.";
const CRITICAL_EVALUATION: &str = "Critically assess your preliminary correction, make sure to correct the initial Web accessibility violation without introducing new Web accessibility violations. Only make corrections if the previous answer is incorrect. Make sure your generated code corrects the Web accessibility violation without introducing new accessibility violations.";
const DECISION_INITIAL: &str = "Confirm your final decision on whether the correction is accurate or not and provide the reasoning for your decision. Only suggest further corrections if the initial response contains errors. Make sure your generated code corrects the Web accessibility violation without introducing new accessibility violations. Enclose your corrected HTML code to replace the initial code with accessibility violations between these two marker strings: \"###START###\" as the first line and \"###END###\" as the last line.";
const DECISION_CORRECTIVE: &str = "Confirm your final decision on whether the correction is accurate or not, and provide the reasoning for your decision. Only suggest further corrections if the initial response contains errors. Make sure your generated code corrects the Web accessibility violation without introducing new accessibility violations. Enclose your corrected HTML code to replace the initial code with accessibility violations between these two marker strings: \"###START###\" as the first line and \"###END###\" as the last line.";
const CONFIDENCE: &str = "Evaluate your confidence (0-100%) in your correction, enclose your confidence score between these two marker strings: \"###START1###\" as first line and \"###END1###\" as last line. Provide an explanation for this confidence level; enclose your explanation between these two marker strings: \"###START2###\" as the first line and \"###END2###\" as last line.";

const CORRECTIVE_RULES_TEXT: &str = "Analyze only the provided HTML snippet and metadata. Do not infer or invent additional structure, styles, or UI elements beyond what is given.\n- Avoid introducing or rewriting content not present in the HTML. Do not add or alter CSS, forms, headers, sections, scripts, or attributes unnecessarily. Modify only the minimal code needed to resolve the violation.\n- Return only the modified lines in a fenced code block. Leave all other parts of the HTML unchanged.\n- Justify every accessibility concern directly with observable evidence from the HTML.";
const CORRECTIVE_VISUAL_RULE: &str = "Prioritize visual analysis: list at least three specific details observable in the image (e.g., color, shape, text, or spatial arrangement).";

const CONTEXTUAL_TEXT: &str = "Given the following source code, can you fix the accessibility issue related to the success criteria according to WCAG 2.1?";
const CONTEXTUAL_VISUAL: &str = "Given the following Web page screenshot and source code, can you fix the accessibility issue related to the success criteria according to WCAG 2.1?";
const REACT_PREAMBLE: &str = "You are a helpful assistant who will correct accessibility issues of a provided Website.\nProvide your thought before you provide a fixed version of the results.\nE.g. Incorrect: <span>Search</span>\nThought: because ... I will ...\nCorrect: <span class=\"DocSearch-Button-Placeholder\">Search</span>\nYou are operating on this Website:";
const ZERO_SHOT: &str = "Is the following HTML code accessible?";
const BASELINE_SCREENSHOT: &str = "Given the Web page screenshot:";

/// Label used for a category in prompts and reports.
pub fn category_label(c: Category) -> &'static str {
    match c {
        Category::Syntactic => "Syntax",
        Category::Semantic => "Semantic",
        Category::Layout => "Layout",
    }
}

pub fn category_description(c: Category) -> &'static str {
    match c {
        Category::Syntactic => "Syntax violations occur when HTML code lacks essential structural elements or attributes required for accessibility.",
        Category::Semantic => "Semantic violations involve the misuse or absence of meaningful content or attributes, such as vague alt text or improper use of semantic elements like <header> or <section>.",
        Category::Layout => "Layout violations are visual or structural barriers in how content is presented, such as low color contrast or viewport settings that block zooming. Fixing them calls for care with CSS and responsive design.",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum BaselineStrategy {
    Contextual,
    ReAct,
    ZeroShot,
}

impl BaselineStrategy {
    pub fn template(self) -> TemplateKind {
        match self {
            BaselineStrategy::Contextual => TemplateKind::Contextual,
            BaselineStrategy::ReAct => TemplateKind::ReAct,
            BaselineStrategy::ZeroShot => TemplateKind::ZeroShot,
        }
    }
}

/// Reads an image file into an attachment, checking that it decodes.
pub fn load_image_attachment(path: &Path) -> Result<Attachment, LlmError> {
    let shown = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|e| LlmError::Screenshot(format!("{shown}: {e}")))?;
    image_attachment(shown, bytes)
}

pub fn image_attachment(source: String, bytes: Vec<u8>) -> Result<Attachment, LlmError> {
    let format = image::guess_format(&bytes).map_err(|e| LlmError::Screenshot(format!("{source}: {e}")))?;
    image::load_from_memory_with_format(&bytes, format)
        .map_err(|e| LlmError::Screenshot(format!("{source}: {e}")))?;
    Ok(Attachment { source, media_type: format.to_mime_type().to_string(), bytes })
}

fn needs_visual(v: &DetectedViolation, registry: &Registry) -> bool {
    v.category == Category::Semantic
        && registry
            .lookup(&v.type_name)
            .map(|s| s.supplementary.is_visual())
            .unwrap_or(false)
}

/// The screenshot for a visual semantic violation, or downloaded image bytes
/// when no screenshot is on file.
fn visual_attachment(v: &DetectedViolation) -> Result<Attachment, LlmError> {
    if let Some(path) = &v.screenshot {
        return load_image_attachment(Path::new(path));
    }
    if let Some(s) = &v.supplementary {
        if let Some(bytes) = &s.data {
            return image_attachment(s.reference.clone(), bytes.clone());
        }
    }
    Err(LlmError::Screenshot(format!("violation {} needs a Web page screenshot", v.id)))
}

fn screenshot_slot(a: &Attachment) -> String {
    format!("Web page screenshot: attached image ({})", a.source)
}

fn violation_slots(v: &DetectedViolation) -> String {
    format!(
        "Category: {}\nCategory description: {}\nViolation name: {}\nViolation description: {}\nURL: {}\nHTML element(s) affected: {}\nImpact: {}",
        category_label(v.category),
        category_description(v.category),
        v.type_name,
        v.description,
        v.context.url,
        v.html(),
        v.impact.label(),
    )
}

fn guidelines(v: &DetectedViolation, registry: &Registry) -> Result<String, LlmError> {
    let spec = registry
        .lookup(&v.type_name)
        .map_err(|e| LlmError::Precondition(e.to_string()))?;
    Ok(guideline_block(&spec.wcag_refs))
}

fn bundle(template: TemplateKind, persona: &str, segments: Vec<Segment>, attachments: Vec<Attachment>) -> PromptBundle {
    PromptBundle {
        template,
        persona: persona.to_string(),
        segments,
        attachments,
        markers: MarkerProtocol::default(),
    }
}

fn judgment_and_after(segs: &mut Vec<Segment>, wcag: String, decision: &str) {
    segs.push(Segment::fixed(PRELIMINARY));
    segs.push(Segment::dynamic(wcag));
    segs.push(Segment::fixed(NO_NEW_VIOLATIONS));
    segs.push(Segment::fixed(CRITICAL_EVALUATION));
    segs.push(Segment::fixed(decision));
    segs.push(Segment::fixed(CONFIDENCE));
}

/// First correction prompt: comprehension, preliminary judgment, critical
/// evaluation, decision confirmation and confidence assessment.
pub fn build_initial_correction_prompt(v: &DetectedViolation, registry: &Registry) -> Result<PromptBundle, LlmError> {
    let wcag = guidelines(v, registry)?;
    let mut segs = vec![
        Segment::fixed(CLARIFY),
        Segment::dynamic(violation_slots(v)),
        Segment::fixed(IMPACT_SCALE),
    ];
    let mut attachments = Vec::new();
    if needs_visual(v, registry) {
        let a = visual_attachment(v)?;
        segs.push(Segment::fixed(SCREENSHOT_TASKS));
        segs.push(Segment::dynamic(screenshot_slot(&a)));
        attachments.push(a);
    }
    judgment_and_after(&mut segs, wcag, DECISION_INITIAL);
    Ok(bundle(TemplateKind::Initial, PERSONA, segs, attachments))
}

/// Feedback text listing what is still wrong with the prior answer.
pub fn residual_feedback(residual: &[DetectedViolation], prior: Option<&LlmResponse>) -> String {
    let mut out = String::from("Your previous correction still contains these Web accessibility violations:\n");
    for r in residual {
        out.push_str(&format!("- {} (score {}): {}\n", r.type_name, r.score, r.description));
    }
    match prior.and_then(|p| p.extracted_code.as_deref()) {
        Some(code) => out.push_str(&format!("Your previous corrected code was:\n{code}")),
        None => out.push_str("Your previous answer had no corrected code between the required markers."),
    }
    out
}

/// Corrective re-prompt carrying the residual violations of the prior answer.
pub fn build_corrective_reprompt(
    v: &DetectedViolation,
    registry: &Registry,
    prior: Option<&LlmResponse>,
    residual: &[DetectedViolation],
) -> Result<PromptBundle, LlmError> {
    if residual.is_empty() {
        return Err(LlmError::Precondition("re-prompting needs at least one residual violation".into()));
    }
    let wcag = guidelines(v, registry)?;
    let visual = needs_visual(v, registry);
    let attachment = if visual { Some(visual_attachment(v)?) } else { None };
    let intro = if visual {
        format!(
            "You are analyzing a Web accessibility issue using a snippet of Affected HTML Element(s), Web page screenshot and related metadata. The screenshot reflects exactly what is rendered to users. Follow these strict rules:\n- {CORRECTIVE_VISUAL_RULE}\n- {CORRECTIVE_RULES_TEXT}\n{CLARIFY}"
        )
    } else {
        format!(
            "You are analyzing a Web accessibility issue using a snippet of Affected HTML Element(s) and related metadata. Follow these strict rules:\n- {CORRECTIVE_RULES_TEXT}\n{CLARIFY}"
        )
    };
    let mut slots = violation_slots(v);
    if let Some(a) = &attachment {
        slots.push('\n');
        slots.push_str(&screenshot_slot(a));
    }
    let mut segs = vec![
        Segment::fixed(intro),
        Segment::dynamic(slots),
        Segment::fixed(IMPACT_SCALE),
        Segment::dynamic(residual_feedback(residual, prior)),
    ];
    judgment_and_after(&mut segs, wcag, DECISION_CORRECTIVE);
    Ok(bundle(TemplateKind::Corrective, PERSONA, segs, attachment.into_iter().collect()))
}

/// One of the comparison prompts.
pub fn build_baseline_prompt(
    strategy: BaselineStrategy,
    v: &DetectedViolation,
    registry: &Registry,
) -> Result<PromptBundle, LlmError> {
    let visual = needs_visual(v, registry);
    let attachment = if visual { Some(visual_attachment(v)?) } else { None };
    let mut segs = Vec::new();
    match strategy {
        BaselineStrategy::Contextual => {
            segs.push(Segment::fixed(if visual { CONTEXTUAL_VISUAL } else { CONTEXTUAL_TEXT }));
            segs.push(Segment::dynamic(v.html()));
            segs.push(Segment::dynamic(guidelines(v, registry)?));
            if let Some(a) = &attachment {
                segs.push(Segment::dynamic(screenshot_slot(a)));
            }
        }
        BaselineStrategy::ReAct => {
            if v.context.url.trim().is_empty() {
                return Err(LlmError::MissingSlot("URL"));
            }
            let advice = v.fix_advice.as_deref().filter(|a| !a.trim().is_empty()).ok_or(LlmError::MissingSlot("fix advice"))?;
            if v.description.trim().is_empty() {
                return Err(LlmError::MissingSlot("violation description"));
            }
            segs.push(Segment::fixed(REACT_PREAMBLE));
            segs.push(Segment::dynamic(format!(
                "{}\nViolation: {}\nDescription: {}\nFix advice: {}\nHTML: {}",
                v.context.url,
                v.type_name,
                v.description,
                advice,
                v.html()
            )));
        }
        BaselineStrategy::ZeroShot => {
            segs.push(Segment::fixed(ZERO_SHOT));
            segs.push(Segment::dynamic(v.html()));
        }
    }
    if strategy != BaselineStrategy::Contextual {
        if let Some(a) = &attachment {
            segs.push(Segment::fixed(BASELINE_SCREENSHOT));
            segs.push(Segment::dynamic(screenshot_slot(a)));
        }
    }
    Ok(bundle(strategy.template(), "", segs, attachment.into_iter().collect()))
}

/// Prompt for whole-page semantic detection.
pub fn semantic_detection_bundle(
    ctx: &PageContext,
    html: &str,
    taxonomy_listing: &str,
    screenshot: Attachment,
    screenshot_note: &str,
) -> PromptBundle {
    let segs = vec![
        Segment::fixed(SEMANTIC_DEFINITION),
        Segment::fixed(SEMANTIC_CONTEXT_DOMAIN),
        Segment::dynamic(format!("    {}", ctx.domain)),
        Segment::fixed(SEMANTIC_CONTEXT_URL),
        Segment::dynamic(format!("    {}", ctx.url)),
        Segment::fixed(SEMANTIC_PROVIDED),
        Segment::dynamic(html.to_string()),
        Segment::fixed(format!("Semantic Accessibility Violation Taxonomy:\n{taxonomy_listing}")),
        Segment::dynamic(format!("Web page screenshot: attached image ({screenshot_note})")),
        Segment::fixed(SEMANTIC_INSTRUCTION),
    ];
    bundle(TemplateKind::SemanticDetection, SEMANTIC_DETECTION_PERSONA, segs, vec![screenshot])
}
