//! Detected violation instances and the page context they were found in.

use serde::{Deserialize, Serialize};

use crate::dom::{ColorValue, HtmlSnippet, NodeRef};
use crate::taxonomy::{impact_to_score, Category, Impact, Supplementary, ViolationTypeSpec};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageContext {
    #[serde(default)]
    pub url: String,
    #[serde(default)]
    pub domain: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
}

impl PageContext {
    pub fn new(url: impl Into<String>, domain: impl Into<String>) -> Self {
        Self {
            url: url.into(),
            domain: domain.into(),
            language: None,
        }
    }
}

/// Extra material a repair needs beyond the HTML itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupplementaryInfo {
    pub kind: Supplementary,
    /// Kind-specific reference: a color pair like `#888888 on #333333`, an
    /// image URL, a screenshot path or a document outline.
    #[serde(rename = "ref")]
    pub reference: String,
    #[serde(skip)]
    pub data: Option<Vec<u8>>,
}

impl SupplementaryInfo {
    pub fn colors(fg: ColorValue, bg: ColorValue) -> Self {
        Self {
            kind: Supplementary::Colors,
            reference: format!("{} on {}", fg.to_hex(), bg.to_hex()),
            data: None,
        }
    }

    pub fn new(kind: Supplementary, reference: impl Into<String>) -> Self {
        Self {
            kind,
            reference: reference.into(),
            data: None,
        }
    }

    /// The (foreground, background) pair of a colors reference.
    pub fn color_pair(&self) -> Option<(ColorValue, ColorValue)> {
        if self.kind != Supplementary::Colors {
            return None;
        }
        let (fg, bg) = self.reference.split_once(" on ")?;
        Some((ColorValue::parse(fg)?, ColorValue::parse(bg)?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffectedElement {
    /// Present when the violation was detected on a live document.
    pub node: Option<NodeRef>,
    pub snippet: HtmlSnippet,
}

impl AffectedElement {
    pub fn detached(html: impl Into<String>) -> Self {
        Self {
            node: None,
            snippet: HtmlSnippet::new(html),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectedViolation {
    pub id: String,
    pub type_name: String,
    pub category: Category,
    pub affected: Vec<AffectedElement>,
    pub description: String,
    pub impact: Impact,
    pub score: u32,
    pub supplementary: Option<SupplementaryInfo>,
    pub context: PageContext,
    /// Set for rules that approximate a rendering-dependent check.
    pub approximate: bool,
    pub fix_advice: Option<String>,
    /// Path to a screenshot of the rendered page, when one was supplied.
    pub screenshot: Option<String>,
}

impl DetectedViolation {
    /// A violation enriched from its taxonomy entry.
    pub fn from_spec(
        id: String,
        spec: &ViolationTypeSpec,
        affected: Vec<AffectedElement>,
        context: PageContext,
    ) -> Self {
        Self {
            id,
            type_name: spec.name.clone(),
            category: spec.category,
            affected,
            description: spec.description.clone(),
            impact: spec.impact,
            score: impact_to_score(spec.impact),
            supplementary: None,
            context,
            approximate: false,
            fix_advice: None,
            screenshot: None,
        }
    }

    /// Affected snippets joined by newlines, as shown to models and used as
    /// the fallback correction.
    pub fn html(&self) -> String {
        self.affected
            .iter()
            .map(|a| a.snippet.text.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn html_elements(&self) -> Vec<String> {
        self.affected.iter().map(|a| a.snippet.text.clone()).collect()
    }
}
