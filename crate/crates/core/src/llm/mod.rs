//! Provider-neutral access to chat completion and embedding backends, the
//! prompt templates, and response parsing.

mod extract;
mod gateway;
pub mod mock;
pub mod openai;
pub mod prompts;
pub mod wcag;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use extract::{extract_first_html, extract_marked, strip_code_fence};
pub use gateway::{Gateway, RetryPolicy};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LlmError {
    #[error("request timed out")]
    Timeout,
    #[error("rate limited by provider")]
    RateLimited,
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("provider rejected the request: {0}")]
    Rejected(String),
    #[error("provider {provider} cannot accept image attachments")]
    Capability { provider: String },
    #[error("environment variable {0} with the API key is not set")]
    MissingApiKey(String),
    #[error("embedding dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("prompt precondition failed: {0}")]
    Precondition(String),
    #[error("prompt slot {0:?} has no value")]
    MissingSlot(&'static str),
    #[error("screenshot unavailable: {0}")]
    Screenshot(String),
}

impl LlmError {
    /// Errors worth retrying with backoff.
    pub fn is_transient(&self) -> bool {
        matches!(self, LlmError::Timeout | LlmError::RateLimited | LlmError::Transport(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TemplateKind {
    SemanticDetection,
    Initial,
    Corrective,
    Contextual,
    ReAct,
    ZeroShot,
}

impl TemplateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TemplateKind::SemanticDetection => "semantic-detection",
            TemplateKind::Initial => "initial",
            TemplateKind::Corrective => "corrective",
            TemplateKind::Contextual => "contextual",
            TemplateKind::ReAct => "react",
            TemplateKind::ZeroShot => "zero-shot",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Fixed,
    Dynamic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub text: String,
}

impl Segment {
    pub fn fixed(text: impl Into<String>) -> Self {
        Self { kind: SegmentKind::Fixed, text: text.into() }
    }

    pub fn dynamic(text: impl Into<String>) -> Self {
        Self { kind: SegmentKind::Dynamic, text: text.into() }
    }
}

/// An image sent alongside the prompt text.
#[derive(Clone, PartialEq, Eq)]
pub struct Attachment {
    /// Where the image came from (file path or URL).
    pub source: String,
    pub media_type: String,
    pub bytes: Vec<u8>,
}

impl std::fmt::Debug for Attachment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Attachment")
            .field("source", &self.source)
            .field("media_type", &self.media_type)
            .field("bytes", &self.bytes.len())
            .finish()
    }
}

impl Attachment {
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(&self.bytes))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkerProtocol {
    pub code_start: String,
    pub code_end: String,
    pub confidence_start: String,
    pub confidence_end: String,
    pub explanation_start: String,
    pub explanation_end: String,
}

impl Default for MarkerProtocol {
    fn default() -> Self {
        Self {
            code_start: "###START###".into(),
            code_end: "###END###".into(),
            confidence_start: "###START1###".into(),
            confidence_end: "###END1###".into(),
            explanation_start: "###START2###".into(),
            explanation_end: "###END2###".into(),
        }
    }
}

impl MarkerProtocol {
    /// Wraps `code` the way a well-behaved model answers.
    pub fn wrap_code(&self, code: &str) -> String {
        format!("{}\n{}\n{}", self.code_start, code, self.code_end)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromptBundle {
    pub template: TemplateKind,
    pub persona: String,
    pub segments: Vec<Segment>,
    pub attachments: Vec<Attachment>,
    pub markers: MarkerProtocol,
}

impl PromptBundle {
    /// Prompt text after the persona.
    pub fn body(&self) -> String {
        self.segments
            .iter()
            .map(|s| s.text.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Persona and body as one text.
    pub fn render(&self) -> String {
        if self.persona.is_empty() {
            self.body()
        } else {
            format!("{}\n\n{}", self.persona, self.body())
        }
    }

    pub fn fixed_segments(&self) -> Vec<&str> {
        self.segments
            .iter()
            .filter(|s| s.kind == SegmentKind::Fixed)
            .map(|s| s.text.as_str())
            .collect()
    }

    /// Hex SHA-256 over persona, segment texts and attachment digests.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.persona.as_bytes());
        for s in &self.segments {
            h.update([0u8]);
            h.update(s.text.as_bytes());
        }
        for a in &self.attachments {
            h.update([1u8]);
            h.update(a.digest().as_bytes());
        }
        hex::encode(h.finalize())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmResponse {
    pub raw_text: String,
    pub extracted_code: Option<String>,
    pub confidence: Option<u8>,
    pub explanation: Option<String>,
}

impl LlmResponse {
    pub fn parse(raw_text: &str, markers: &MarkerProtocol) -> Self {
        let code = extract_marked(raw_text, &markers.code_start, &markers.code_end)
            .map(|c| strip_code_fence(&c).to_string());
        let confidence = extract_marked(raw_text, &markers.confidence_start, &markers.confidence_end)
            .and_then(|c| parse_confidence(&c));
        let explanation = extract_marked(raw_text, &markers.explanation_start, &markers.explanation_end)
            .map(|e| e.trim().to_string())
            .filter(|e| !e.is_empty());
        Self {
            raw_text: raw_text.to_string(),
            extracted_code: code,
            confidence,
            explanation,
        }
    }
}

/// First integer in the text, clamped to 0..=100.
fn parse_confidence(text: &str) -> Option<u8> {
    let digits: String = text
        .chars()
        .skip_while(|c| !c.is_ascii_digit())
        .take_while(|c| c.is_ascii_digit())
        .collect();
    digits.parse::<u64>().ok().map(|v| v.min(100) as u8)
}

/// A chat completion backend.
pub trait LlmProvider: Send + Sync {
    fn name(&self) -> &str;
    fn supports_images(&self) -> bool;
    fn complete(&self, bundle: &PromptBundle) -> Result<String, LlmError>;
}

/// A sentence embedding backend.
pub trait Embedder: Send + Sync {
    fn embed(&self, text: &str) -> Result<Vec<f32>, LlmError>;
}

pub fn cosine_similarity(a: &[f32], b: &[f32]) -> Result<f64, LlmError> {
    if a.len() != b.len() {
        return Err(LlmError::DimensionMismatch(a.len(), b.len()));
    }
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (x, y) in a.iter().zip(b) {
        let (x, y) = (f64::from(*x), f64::from(*y));
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_basics() {
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine_similarity(&[0.3, -2.0, 5.0], &[0.3, -2.0, 5.0]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine_similarity(&[1.0], &[1.0, 2.0]), Err(LlmError::DimensionMismatch(1, 2)));
    }

    #[test]
    fn response_markers() {
        let m = MarkerProtocol::default();
        let raw = "thinking...\n###START###\n```html\n<p>x</p>\n```\n###END###\n###START1###\n85%\n###END1###\n###START2###\nclear fix\n###END2###";
        let r = LlmResponse::parse(raw, &m);
        assert_eq!(r.extracted_code.as_deref(), Some("<p>x</p>"));
        assert_eq!(r.confidence, Some(85));
        assert_eq!(r.explanation.as_deref(), Some("clear fix"));
        let r = LlmResponse::parse("nothing", &m);
        assert_eq!((r.extracted_code, r.confidence), (None, None));
    }

    #[test]
    fn fingerprint_tracks_content() {
        let b = PromptBundle {
            template: TemplateKind::ZeroShot,
            persona: String::new(),
            segments: vec![Segment::fixed("a"), Segment::dynamic("b")],
            attachments: vec![],
            markers: MarkerProtocol::default(),
        };
        let mut c = b.clone();
        assert_eq!(b.fingerprint(), c.fingerprint());
        c.segments[1].text = "c".into();
        assert_ne!(b.fingerprint(), c.fingerprint());
    }
}
