//! Deterministic offline providers for tests and dry runs.

use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use super::{Embedder, LlmError, LlmProvider, PromptBundle, TemplateKind};

/// One scripted reply. All present conditions must hold.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockRule {
    #[serde(default)]
    pub template: Option<TemplateKind>,
    /// Substring of the rendered prompt.
    #[serde(default)]
    pub contains: Option<String>,
    #[serde(default)]
    pub fingerprint: Option<String>,
    pub response: String,
}

impl MockRule {
    fn matches(&self, bundle: &PromptBundle, rendered: &str) -> bool {
        self.template.is_none_or(|t| t == bundle.template)
            && self.contains.as_deref().is_none_or(|c| rendered.contains(c))
            && self.fingerprint.as_deref().is_none_or(|f| f == bundle.fingerprint())
    }
}

/// A JSON-loadable script: the first matching rule answers, else `default`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockScript {
    #[serde(default = "yes")]
    pub multimodal: bool,
    #[serde(default)]
    pub default: Option<String>,
    #[serde(default)]
    pub rules: Vec<MockRule>,
}

fn yes() -> bool {
    true
}

type Responder = dyn Fn(&PromptBundle) -> Result<String, LlmError> + Send + Sync;

pub struct MockProvider {
    multimodal: bool,
    respond: Box<Responder>,
    calls: AtomicU64,
}

impl MockProvider {
    pub fn from_fn(
        multimodal: bool,
        f: impl Fn(&PromptBundle) -> Result<String, LlmError> + Send + Sync + 'static,
    ) -> Self {
        Self { multimodal, respond: Box::new(f), calls: AtomicU64::new(0) }
    }

    pub fn from_script(script: MockScript) -> Self {
        let multimodal = script.multimodal;
        Self::from_fn(multimodal, move |bundle| {
            let rendered = bundle.render();
            script
                .rules
                .iter()
                .find(|r| r.matches(bundle, &rendered))
                .map(|r| r.response.clone())
                .or_else(|| script.default.clone())
                .ok_or_else(|| LlmError::Rejected(format!("mock script has no reply for a {} prompt", bundle.template.as_str())))
        })
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        Ok(Self::from_script(serde_json::from_str(text)?))
    }

    pub fn load(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    /// Always answers with `text` verbatim.
    pub fn constant(text: impl Into<String>) -> Self {
        let text = text.into();
        Self::from_fn(true, move |_| Ok(text.clone()))
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }
}

impl LlmProvider for MockProvider {
    fn name(&self) -> &str {
        "mock"
    }

    fn supports_images(&self) -> bool {
        self.multimodal
    }

    fn complete(&self, bundle: &PromptBundle) -> Result<String, LlmError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        (self.respond)(bundle)
    }
}

/// Hashed bag-of-words embedding: lower-cased alphanumeric tokens, each
/// adding 1 to a hashed bucket. Deterministic and offline; identical texts
/// embed identically, disjoint vocabularies are orthogonal up to collisions.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    pub dims: usize,
}

impl Default for HashEmbedder {
    fn default() -> Self {
        Self { dims: 512 }
    }
}

impl Embedder for HashEmbedder {
    fn embed(&self, text: &str) -> Result<Vec<f32>, LlmError> {
        let mut v = vec![0f32; self.dims.max(1)];
        for tok in text
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
        {
            let h = Sha256::digest(tok.to_lowercase().as_bytes());
            let idx = u64::from_le_bytes(h[..8].try_into().expect("8 bytes")) as usize % v.len();
            v[idx] += 1.0;
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{cosine_similarity, MarkerProtocol, Segment};

    fn bundle(template: TemplateKind, text: &str) -> PromptBundle {
        PromptBundle {
            template,
            persona: String::new(),
            segments: vec![Segment::fixed(text)],
            attachments: vec![],
            markers: MarkerProtocol::default(),
        }
    }

    #[test]
    fn script_rules_in_order() {
        let fp = bundle(TemplateKind::Initial, "exact").fingerprint();
        let json = format!(
            r#"{{"default":"d","rules":[
                {{"fingerprint":"{fp}","response":"by-fp"}},
                {{"template":"corrective","response":"second"}},
                {{"contains":"button","response":"has-button"}}
            ]}}"#
        );
        let m = MockProvider::from_json(&json).unwrap();
        assert_eq!(m.complete(&bundle(TemplateKind::Initial, "exact")).unwrap(), "by-fp");
        assert_eq!(m.complete(&bundle(TemplateKind::Corrective, "x")).unwrap(), "second");
        assert_eq!(m.complete(&bundle(TemplateKind::Initial, "<button>")).unwrap(), "has-button");
        assert_eq!(m.complete(&bundle(TemplateKind::Initial, "other")).unwrap(), "d");
        assert_eq!(m.calls(), 4);
        assert!(MockProvider::from_json(r#"{"rules":[{"response":"x","bogus":1}]}"#).is_err());
    }

    #[test]
    fn scripted_marker_reply() {
        let m = MockProvider::from_json(r####"{"rules":[{"contains":"key","response":"###START###<p>x</p>###END###"}]}"####).unwrap();
        assert_eq!(m.complete(&bundle(TemplateKind::Initial, "key")).unwrap(), "###START###<p>x</p>###END###");
        assert!(m.complete(&bundle(TemplateKind::Initial, "nope")).is_err());
    }

    #[test]
    fn hash_embedder_is_deterministic() {
        let e = HashEmbedder::default();
        let a = e.embed("Subscribe to the vitamin newsletter").unwrap();
        let b = e.embed("subscribe to the Vitamin newsletter").unwrap();
        assert!((cosine_similarity(&a, &b).unwrap() - 1.0).abs() < 1e-6);
        let c = e.embed("completely unrelated words").unwrap();
        assert!(cosine_similarity(&a, &c).unwrap() < 0.5);
    }
}
