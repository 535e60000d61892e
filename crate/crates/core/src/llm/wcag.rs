//! Short texts for the success criteria referenced by the taxonomy, used to
//! fill the guideline slot of correction prompts.

const CRITERIA: &[(&str, &str)] = &[
    ("1.1.1", "Non-text Content. All meaningful visual elements (e.g., images, image buttons, image maps) must have descriptive alternative text. Form controls, inputs, multimedia, and frames must include accessible names, labels, or titles to ensure clarity for assistive technologies."),
    ("1.2.1", "Audio-only and Video-only (Prerecorded). Prerecorded audio-only and video-only media must have an alternative, such as a transcript or an audio track, that presents equivalent information."),
    ("1.2.3", "Audio Description or Media Alternative (Prerecorded). Prerecorded video must have an audio description or a full text alternative describing its visual content."),
    ("1.3.1", "Info and Relationships. Structure and relationships conveyed visually, such as headings, lists, tables and form groupings, must be available in markup or text."),
    ("1.4.1", "Use of Color. Color must not be the only visual means of conveying information, indicating an action, prompting a response or distinguishing an element."),
    ("1.4.3", "Contrast (Minimum). Text and images of text must have a contrast ratio of at least 4.5:1, or 3:1 for large text."),
    ("1.4.4", "Resize Text. Text must be resizable up to 200 percent without assistive technology and without loss of content or functionality."),
    ("1.4.12", "Text Spacing. No content or functionality may be lost when users override line height, paragraph, letter and word spacing."),
    ("2.1.1", "Keyboard. All functionality must be operable through a keyboard interface without requiring specific timings for individual keystrokes."),
    ("2.1.3", "Keyboard (No Exception). All functionality must be operable through a keyboard interface without exception."),
    ("2.2.1", "Timing Adjustable. Users must be able to turn off, adjust or extend any time limit set by the content, including automatic refreshes."),
    ("2.4.2", "Page Titled. Web pages must have titles that describe their topic or purpose."),
    ("2.4.4", "Link Purpose (In Context). The purpose of each link must be determinable from the link text alone or from the link text together with its context."),
    ("2.4.6", "Headings and Labels. Headings and labels must describe their topic or purpose."),
    ("2.4.9", "Link Purpose (Link Only). The purpose of each link must be identifiable from the link text alone."),
    ("2.4.10", "Section Headings. Section headings must be used to organize the content."),
    ("2.5.3", "Label in Name. For components with visible text labels, the accessible name must contain the visible text."),
    ("2.5.5", "Target Size. Pointer targets must be at least 44 by 44 CSS pixels unless an equivalent larger target exists."),
    ("3.1.1", "Language of Page. The default human language of each page must be programmatically determinable."),
    ("3.1.2", "Language of Parts. The human language of each passage or phrase must be programmatically determinable."),
    ("3.3.2", "Labels or Instructions. Labels or instructions must be provided when content requires user input."),
    ("4.1.1", "Parsing. Markup must have complete start and end tags, nest correctly, contain no duplicate attributes and use unique ids."),
    ("4.1.2", "Name, Role, Value Markup: is used in a way that facilitates accessibility. This includes following the HTML specifications and using forms, input labels, frame titles, etc., appropriately. ARIA is used appropriately to enhance accessibility when HTML is not sufficient."),
];

fn number(reference: &str) -> &str {
    let r = reference.trim();
    r.strip_prefix("WCAG").map(str::trim).unwrap_or(r)
}

/// Guideline text for a reference such as `WCAG 4.1.2`.
pub fn criterion_text(reference: &str) -> Option<&'static str> {
    let n = number(reference);
    CRITERIA.iter().find(|(k, _)| *k == n).map(|(_, t)| *t)
}

/// The references rendered for a prompt, one per line, as
/// `WCAG <number> <text>`.
pub fn guideline_block(refs: &[String]) -> String {
    refs.iter()
        .map(|r| {
            let n = number(r);
            match criterion_text(r) {
                Some(t) => format!("WCAG {n} {t}"),
                None => format!("WCAG {n}"),
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::Registry;

    #[test]
    fn every_bundled_reference_has_text() {
        for spec in Registry::bundled().list_types(None) {
            for r in &spec.wcag_refs {
                assert!(criterion_text(r).is_some(), "{} cites {r}", spec.name);
            }
        }
    }

    #[test]
    fn block_format() {
        let b = guideline_block(&["WCAG 4.1.2".into()]);
        assert!(b.starts_with("WCAG 4.1.2 Name, Role, Value Markup: is used"));
    }
}
